#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "photonnet/amplitude.hpp"
#include "photonnet/modes.hpp"

namespace photonnet {

/// Experiment description, schema_version 1. The JSON layout mirrors these
/// structs field for field; parse rejects unknown keys and reports full
/// field paths. `schema` on the CLI prints the documented layout.

/// One source constructor plus its parameters. Which fields are meaningful
/// depends on `kind`; parse fills only those and serialize writes only
/// those back.
struct SourceSpec {
  std::string kind; // single_photon | n_photon | coherent | bi_photon |
                    // qkd_singlet | qkd_superposition | general_multi_mode

  // single-mode kinds
  std::string mode;
  VecXc shape;                   // one entry per grid bin
  int photons = 1;               // n_photon
  Complex alpha{0.0, 0.0};       // coherent
  double cutoff_epsilon = 1e-12; // coherent truncation budget

  // two-fiber kinds: polarization pairs on fiber a and fiber b
  std::array<std::string, 2> a_modes{};
  std::array<std::string, 2> b_modes{};
  MatXc coefficients;  // bi_photon: 2x2 over (a_i, b_j)
  std::vector<SpectralAmplitude> amplitudes; // bi_photon: 4 row-major;
                                             // qkd_*: 1 pair amplitude;
                                             // general_multi_mode: 1 joint
  int pairs = 1;             // qkd_singlet
  VecXc weights;             // qkd_superposition: c_0 .. c_N
  double energy_scale = 1.0; // qkd_superposition: c_n -> c_n s^n, renormalized
  int a1_photons = 0;        // general_multi_mode: j of m on the a side,
  int a_photons = 0;         // k of n on the b side
  int b1_photons = 0;
  int b_photons = 0;
};

/// One network element. `inputs`/`outputs` hold declared mode ids; loss
/// stores [output, sink] in `outputs`, pol_rotation acts in place.
struct ChannelSpec {
  std::string kind; // beam_splitter | splice | coupler | pol_rotation |
                    // loss | custom_unitary
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double eta_trans = 0.5;            // beam_splitter
  Complex u{1.0, 0.0}, v{0.0, 0.0};  // pol_rotation
  VecXc eta_loss;                    // loss: size 1 broadcasts, else per bin
  std::vector<MatXc> blocks;         // matrix kinds: size 1 broadcasts
};

struct DetectorSpec {
  std::string id; // [A-Za-z_][A-Za-z0-9_]*, unique; names result columns
  std::vector<std::string> scope;
  double eta_det = 1.0;
  double p_dark = 0.0;
};

struct SweepSpec {
  std::string parameter; // source.alpha | source.energy_scale |
                         // detectors.<id>.eta_det | detectors.<id>.p_dark |
                         // channels.<index>.eta_trans | channels.<index>.eta_loss
  std::vector<double> values;
};

struct Experiment {
  GridPtr grid;
  RegistryPtr modes;
  SourceSpec source;
  std::vector<ChannelSpec> channels; // applied in order
  std::vector<DetectorSpec> detectors;
  std::vector<std::string> outputs; // outcome_table | marginals |
                                    // number_expectations, in order
  std::optional<SweepSpec> sweep;
};

/// Strict parse: unknown fields rejected, every error names the field path,
/// semantic checks cover undeclared modes, duplicate ids, overlapping
/// detector scopes and non-isometric matrices (reporting the residual).
Experiment parseExperiment(const json &j);

/// json::parse wrapper mapping syntax errors to ValidationError.
Experiment parseExperimentText(const std::string &text);

/// Inverse of parse up to defaulted fields: parse(serialize(e)) rebuilds e.
json experimentToJson(const Experiment &e);

/// Result table: one row per sweep point (a single row when there is no
/// sweep), columns fixed by the experiment alone.
struct RunResult {
  std::string sweep_parameter;      // empty when the file has no sweep
  std::vector<double> sweep_values; // one entry per row
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Builds the source, applies the channels in order and evaluates the
/// requested outputs at every sweep point. Points run in parallel, bounded
/// by PHOTONNET_THREADS; rows are assembled in declared order, so the
/// output is deterministic. Errors carry the sweep-point context.
RunResult runExperiment(const Experiment &e);

/// CSV with a header row; doubles printed with %.17g so identical
/// experiments give byte-identical files.
std::string resultToCsv(const RunResult &r);

json resultToJson(const RunResult &r);

/// Human-readable schema reference for the `schema` subcommand.
const char *experimentSchemaText();

} // namespace photonnet
