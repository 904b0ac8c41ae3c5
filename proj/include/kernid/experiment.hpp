#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kernid/inverse.hpp"
#include "kernid/kernel.hpp"
#include "kernid/measurement.hpp"
#include "kernid/spectral.hpp"

namespace kernid {

enum class BoundaryDrive { one_minus_exp, t_over_1_plus_t, custom };

/// Full description of one synthetic identification experiment.
struct ExperimentConfig {
    std::vector<ExpSumKernel::Term> kernel_terms{{0.1, 0.5}, {0.2, 2.0}, {0.5, 3.0}};
    double T = 5.0;
    double fine_step = 1e-3;
    double rate = 10.0; // measurements per time unit
    double noise_level = 0.01;
    NoiseKind noise_kind = NoiseKind::uniform;
    std::uint64_t seed = 1;
    BoundaryDrive input_f = BoundaryDrive::one_minus_exp;
    std::string custom_g_path;            // drive samples when input_f == custom
    int n_max = 400;
    bool monotone_projection = false;     // project the averaged M onto increasing signals
    std::optional<double> blend_known_n0; // pull N_rec toward a known N(0) near t = 0
    InverseConfig inverse;

    void validate() const;
    ExpSumKernel kernel() const { return ExpSumKernel(kernel_terms); }
    UniformGrid fine_grid() const;
    UniformGrid measurement_grid() const;

    /// Built-in configuration of the reference toy experiment.
    static ExperimentConfig paper();

    static ExperimentConfig from_json_file(const std::string& path);
    std::string to_json_string() const;
};

/// Noiseless forward synthesis: everything the measurement stage consumes.
struct ForwardData {
    Signal K_fine, Yf_fine, y_xi_fine, y_eta_fine;
    Signal K, Yf, y_xi, y_eta;     // noiseless, measurement grid
    Signal truth_M, truth_N;       // analytic, measurement grid
    Signal g;                      // boundary drive, measurement grid
    double gamma = 0.0;            // profile functional of the ramp truncation
};

ForwardData run_forward(const ExperimentConfig& cfg);

/// Corrupt the noiseless measurement-grid signals with the configured noise.
/// Each signal uses its own stream, seeded with 4*seed + {0: K, 1: Yf,
/// 2: y_xi, 3: y_eta}.
MeasurementSet corrupt(const ForwardData& fwd, const ExperimentConfig& cfg,
                       std::uint64_t seed);

/// Run the configured identification route on a measurement set.
/// Errors versus truth are filled when truth signals are provided.
ReconstructionReport identify_measurements(const MeasurementSet& meas, const Signal& g,
                                           const ExperimentConfig& cfg, double gamma,
                                           const Signal* truth_M, const Signal* truth_N);

/// Subcommand bodies. All files are read from / written to `dir` using the
/// shared signal CSV format; identify additionally writes report.json and,
/// when truth files are present, plot_M.csv / plot_N.csv.
void run_simulate(const ExperimentConfig& cfg, const std::string& dir);
ReconstructionReport run_identify(const ExperimentConfig& cfg, const std::string& dir);

struct SweepRow {
    std::uint64_t seed;
    double rel_l2_M;
    double rel_l2_N;
};

/// simulate + identify; with sweep_count > 0 also repeats the noise draw and
/// identification over consecutive seeds and writes sweep_summary.csv.
std::vector<SweepRow> run_pipeline(const ExperimentConfig& cfg, const std::string& dir,
                                   int sweep_count = 0);

} // namespace kernid
