#include "kernid/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "kernid/numerics.hpp"

namespace kernid {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string method_name(Method m) {
    switch (m) {
        case Method::first_kind: return "first_kind";
        case Method::second_kind: return "second_kind";
        case Method::two_initial: return "two_initial";
    }
    throw ConfigError("unknown method");
}

Method method_from(const std::string& s) {
    if (s == "first_kind") return Method::first_kind;
    if (s == "second_kind") return Method::second_kind;
    if (s == "two_initial") return Method::two_initial;
    throw ConfigError("config: unknown method '" + s + "'");
}

std::string drive_name(BoundaryDrive d) {
    switch (d) {
        case BoundaryDrive::one_minus_exp: return "one_minus_exp";
        case BoundaryDrive::t_over_1_plus_t: return "t_over_1_plus_t";
        case BoundaryDrive::custom: return "custom";
    }
    throw ConfigError("unknown drive");
}

BoundaryDrive drive_from(const std::string& s) {
    if (s == "one_minus_exp") return BoundaryDrive::one_minus_exp;
    if (s == "t_over_1_plus_t") return BoundaryDrive::t_over_1_plus_t;
    if (s == "custom") return BoundaryDrive::custom;
    throw ConfigError("config: unknown input_f '" + s + "'");
}

std::size_t whole_intervals(double span, double step, const char* what) {
    const double ratio = span / step;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
        throw ConfigError(std::string("config: ") + what +
                          " is not a whole number of steps");
    return static_cast<std::size_t>(rounded);
}

Signal drive_samples(const ExperimentConfig& cfg, const UniformGrid& grid) {
    std::vector<double> g(grid.size());
    switch (cfg.input_f) {
        case BoundaryDrive::one_minus_exp:
            for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::exp(-grid.t(j));
            break;
        case BoundaryDrive::t_over_1_plus_t:
            for (std::size_t j = 0; j < g.size(); ++j) {
                const double d = 1.0 + grid.t(j);
                g[j] = 1.0 / (d * d);
            }
            break;
        case BoundaryDrive::custom: {
            Signal s = read_signal(cfg.custom_g_path);
            if (!s.grid.compatible_with(grid)) {
                if (s.grid.step < grid.step) s = downsample(s, 1.0 / grid.step);
                if (!s.grid.compatible_with(grid))
                    throw ConfigError("config: custom drive is not sampled on the working grid");
            }
            return Signal(grid, std::move(s.values));
        }
    }
    return Signal(grid, std::move(g));
}

std::string path_in(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

void write_plot(const std::string& path, const Signal& truth, const Signal& rec,
                const Signal& avg) {
    std::ofstream file(path);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    file << "t,truth,reconstruction,averaged\n";
    char buf[160];
    for (std::size_t j = 0; j < rec.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", rec.grid.t(j),
                      truth.values[j], rec.values[j], avg.values[j]);
        file << buf;
    }
}

} // namespace

void ExperimentConfig::validate() const {
    kernel(); // constructor enforces the term invariants
    if (!(T > 0.0)) throw ConfigError("config: T must be positive");
    if (!(rate > 0.0)) throw ConfigError("config: rate must be positive");
    if (!(fine_step > 0.0)) throw ConfigError("config: fine_step must be positive");
    if (!(noise_level >= 0.0)) throw ConfigError("config: noise_level must be >= 0");
    if (n_max < 1) throw ConfigError("config: n_max must be >= 1");
    const double meas_step = 1.0 / rate;
    const double ratio = meas_step / fine_step;
    if (std::abs(ratio - std::round(ratio)) > 1e-12 * ratio)
        throw ConfigError("config: fine_step must divide the measurement step 1/rate");
    whole_intervals(T, meas_step, "horizon T");
    whole_intervals(T, fine_step, "horizon T");
    if (input_f == BoundaryDrive::custom && custom_g_path.empty())
        throw ConfigError("config: custom input_f requires custom_g");
    inverse.validate();
}

UniformGrid ExperimentConfig::fine_grid() const {
    return UniformGrid(fine_step, whole_intervals(T, fine_step, "horizon T"));
}

UniformGrid ExperimentConfig::measurement_grid() const {
    const double meas_step = 1.0 / rate;
    return UniformGrid(meas_step, whole_intervals(T, meas_step, "horizon T"));
}

ExperimentConfig ExperimentConfig::paper() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open config '" + path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(file);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }

    ExperimentConfig cfg; // defaults reproduce the reference experiment
    try {
        if (j.contains("kernel")) {
            cfg.kernel_terms.clear();
            for (const auto& pair : j.at("kernel"))
                cfg.kernel_terms.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
        }
        if (j.contains("T")) cfg.T = j.at("T").get<double>();
        if (j.contains("fine_step")) cfg.fine_step = j.at("fine_step").get<double>();
        if (j.contains("rate")) cfg.rate = j.at("rate").get<double>();
        if (j.contains("noise_level")) cfg.noise_level = j.at("noise_level").get<double>();
        if (j.contains("noise_dist"))
            cfg.noise_kind = j.at("noise_dist").get<std::string>() == "gaussian"
                                 ? NoiseKind::gaussian
                                 : NoiseKind::uniform;
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("input_f")) cfg.input_f = drive_from(j.at("input_f").get<std::string>());
        if (j.contains("custom_g")) cfg.custom_g_path = j.at("custom_g").get<std::string>();
        if (j.contains("n_max")) cfg.n_max = j.at("n_max").get<int>();
        if (j.contains("monotone_projection"))
            cfg.monotone_projection = j.at("monotone_projection").get<bool>();
        if (j.contains("blend_known_n0") && !j.at("blend_known_n0").is_null())
            cfg.blend_known_n0 = j.at("blend_known_n0").get<double>();
        if (j.contains("inverse")) {
            const auto& inv = j.at("inverse");
            if (inv.contains("lavrentiev_eps"))
                cfg.inverse.lavrentiev_eps = inv.at("lavrentiev_eps").get<double>();
            if (inv.contains("tikhonov_lambda"))
                cfg.inverse.tikhonov_lambda = inv.at("tikhonov_lambda").get<double>();
            if (inv.contains("average_halfwidth"))
                cfg.inverse.average_halfwidth = inv.at("average_halfwidth").get<int>();
            if (inv.contains("method"))
                cfg.inverse.method = method_from(inv.at("method").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string ExperimentConfig::to_json_string() const {
    ordered_json j;
    ordered_json terms = ordered_json::array();
    for (const auto& term : kernel_terms) terms.push_back({term.amplitude, term.rate});
    j["kernel"] = std::move(terms);
    j["T"] = T;
    j["fine_step"] = fine_step;
    j["rate"] = rate;
    j["noise_level"] = noise_level;
    j["noise_dist"] = noise_kind == NoiseKind::gaussian ? "gaussian" : "uniform";
    j["seed"] = seed;
    j["input_f"] = drive_name(input_f);
    if (input_f == BoundaryDrive::custom) j["custom_g"] = custom_g_path;
    j["n_max"] = n_max;
    j["monotone_projection"] = monotone_projection;
    j["blend_known_n0"] = blend_known_n0 ? ordered_json(*blend_known_n0) : ordered_json(nullptr);
    j["inverse"] = {{"lavrentiev_eps", inverse.lavrentiev_eps},
                    {"tikhonov_lambda", inverse.tikhonov_lambda},
                    {"average_halfwidth", inverse.average_halfwidth},
                    {"method", method_name(inverse.method)}};
    return j.dump(2) + "\n";
}

ForwardData run_forward(const ExperimentConfig& cfg) {
    cfg.validate();
    const ExpSumKernel kernel = cfg.kernel();
    const UniformGrid fine = cfg.fine_grid();

    std::vector<ModeSolution> modes;
    modes.reserve(static_cast<std::size_t>(cfg.n_max));
    for (int n = 1; n <= cfg.n_max; ++n) modes.push_back(solve_mode_expsum(kernel, n, fine));

    ForwardData fwd;
    fwd.K_fine = compute_K(modes, cfg.n_max, SawtoothAccel::for_kernel(kernel));

    // The ramp profile makes y_xi exactly the negated K series.
    fwd.y_xi_fine = fwd.K_fine;
    for (double& v : fwd.y_xi_fine.values) v = -v;

    const BoundaryInput drive(drive_samples(cfg, fine));
    const Signal M_fine = sample_primitive(kernel, fine);
    fwd.Yf_fine = flux_from_boundary(drive, fwd.K_fine, M_fine);

    const InitialCondition ramp = ramp_coefficients(cfg.n_max);
    fwd.y_eta_fine = flux_y_eta(ramp, modes);
    fwd.gamma = gamma_functional(ramp);

    fwd.K = downsample(fwd.K_fine, cfg.rate);
    fwd.Yf = downsample(fwd.Yf_fine, cfg.rate);
    fwd.y_xi = downsample(fwd.y_xi_fine, cfg.rate);
    fwd.y_eta = downsample(fwd.y_eta_fine, cfg.rate);

    const UniformGrid coarse = cfg.measurement_grid();
    fwd.truth_M = sample_primitive(kernel, coarse);
    fwd.truth_N = Signal(coarse, sample_kernel(kernel, coarse).values);
    fwd.g = drive_samples(cfg, coarse);
    return fwd;
}

MeasurementSet corrupt(const ForwardData& fwd, const ExperimentConfig& cfg,
                       std::uint64_t seed) {
    MeasurementSet meas;
    meas.K = add_noise(fwd.K, cfg.noise_level, 4 * seed + 0, cfg.noise_kind);
    meas.Yf = add_noise(fwd.Yf, cfg.noise_level, 4 * seed + 1, cfg.noise_kind);
    meas.y_xi = add_noise(fwd.y_xi, cfg.noise_level, 4 * seed + 2, cfg.noise_kind);
    meas.y_eta = add_noise(fwd.y_eta, cfg.noise_level, 4 * seed + 3, cfg.noise_kind);
    meas.noise_level = cfg.noise_level;
    meas.seed = seed;
    meas.input_descriptor = drive_name(cfg.input_f) + ", ramp profile";
    meas.validate();
    return meas;
}

namespace {

ReconstructionReport identify_impl(const MeasurementSet& meas, const Signal& g,
                                   const ExperimentConfig& cfg, double gamma,
                                   const Signal* truth_M, const Signal* truth_N,
                                   Signal* raw_M_out) {
    const InverseConfig& inv = cfg.inverse;
    inv.validate();

    Signal M_raw, M_rec, N_rec;
    if (inv.method == Method::two_initial) {
        if (!meas.y_xi || !meas.y_eta)
            throw IoError("identify: two_initial needs y_xi and y_eta measurements");
        N_rec = moving_average(identify_N_two_initial(*meas.y_xi, *meas.y_eta, gamma),
                               inv.average_halfwidth);
        M_raw = Signal((*meas.y_xi).grid,
                       cumulative_trapezoid(N_rec.values, N_rec.grid.step));
        M_rec = M_raw;
    } else {
        if (!meas.K || !meas.Yf)
            throw IoError("identify: this method needs K and Yf measurements");
        if (inv.method == Method::first_kind) {
            M_raw = identify_M_first_kind(*meas.K, *meas.Yf, g, inv.lavrentiev_eps);
        } else {
            M_raw = identify_M_second_kind(*meas.K, *meas.Yf, g);
        }
        M_rec = moving_average(stabilize_reconstruction(M_raw), inv.average_halfwidth);
        M_rec.values[0] = 0.0;
        if (cfg.monotone_projection) M_rec = monotone_projection(M_rec);
        N_rec = moving_average(identify_N_tikhonov(M_rec, inv.tikhonov_lambda),
                               inv.average_halfwidth);
    }
    if (cfg.blend_known_n0) N_rec = blend_initial_value(N_rec, *cfg.blend_known_n0);

    for (double v : N_rec.values)
        if (!std::isfinite(v)) throw NumericError("identify: non-finite reconstruction");

    ReconstructionReport report;
    report.M_rec = std::move(M_rec);
    report.N_rec = std::move(N_rec);
    report.config = inv;
    report.seed = meas.seed;
    if (truth_M) report.rel_l2_M = relative_l2_error(report.M_rec, *truth_M);
    if (truth_N) report.rel_l2_N = relative_l2_error(report.N_rec, *truth_N);
    if (raw_M_out) *raw_M_out = std::move(M_raw);
    return report;
}

} // namespace

ReconstructionReport identify_measurements(const MeasurementSet& meas, const Signal& g,
                                           const ExperimentConfig& cfg, double gamma,
                                           const Signal* truth_M, const Signal* truth_N) {
    return identify_impl(meas, g, cfg, gamma, truth_M, truth_N, nullptr);
}

namespace {

void write_simulation(const ForwardData& fwd, const ExperimentConfig& cfg,
                      const std::string& dir) {
    fs::create_directories(dir);
    const MeasurementSet meas = corrupt(fwd, cfg, cfg.seed);
    write_signal(*meas.K, path_in(dir, "K.csv"));
    write_signal(*meas.Yf, path_in(dir, "Yf.csv"));
    write_signal(*meas.y_xi, path_in(dir, "y_xi.csv"));
    write_signal(*meas.y_eta, path_in(dir, "y_eta.csv"));
    write_signal(fwd.truth_M, path_in(dir, "truth_M.csv"));
    write_signal(fwd.truth_N, path_in(dir, "truth_N.csv"));
    write_signal(fwd.K, path_in(dir, "truth_K.csv"));
    write_signal(fwd.Yf, path_in(dir, "truth_Yf.csv"));
    write_signal(fwd.y_xi, path_in(dir, "truth_y_xi.csv"));
    write_signal(fwd.y_eta, path_in(dir, "truth_y_eta.csv"));
}

} // namespace

void run_simulate(const ExperimentConfig& cfg, const std::string& dir) {
    write_simulation(run_forward(cfg), cfg, dir);
}

ReconstructionReport run_identify(const ExperimentConfig& cfg, const std::string& dir) {
    cfg.validate();
    const UniformGrid coarse = cfg.measurement_grid();

    MeasurementSet meas;
    meas.seed = cfg.seed;
    meas.noise_level = cfg.noise_level;
    const bool needs_flux_pair = cfg.inverse.method != Method::two_initial;
    auto load = [&](const char* name, std::optional<Signal>& slot, bool required) {
        const std::string p = path_in(dir, name);
        if (!fs::exists(p)) {
            if (required)
                throw IoError(std::string("identify: missing required measurement '") + name +
                              "' for method " + method_name(cfg.inverse.method));
            return;
        }
        slot = read_signal(p);
        if (!slot->grid.compatible_with(coarse, 1e-9))
            throw IoError(std::string("identify: '") + name +
                          "' is not on the configured measurement grid");
    };
    load("K.csv", meas.K, needs_flux_pair);
    load("Yf.csv", meas.Yf, needs_flux_pair);
    load("y_xi.csv", meas.y_xi, !needs_flux_pair);
    load("y_eta.csv", meas.y_eta, !needs_flux_pair);
    meas.validate();

    std::optional<Signal> truth_M, truth_N;
    if (fs::exists(path_in(dir, "truth_M.csv"))) truth_M = read_signal(path_in(dir, "truth_M.csv"));
    if (fs::exists(path_in(dir, "truth_N.csv"))) truth_N = read_signal(path_in(dir, "truth_N.csv"));

    const Signal g = drive_samples(cfg, coarse);
    const double gamma = gamma_functional(ramp_coefficients(cfg.n_max));
    Signal M_raw;
    ReconstructionReport report =
        identify_impl(meas, g, cfg, gamma, truth_M ? &*truth_M : nullptr,
                      truth_N ? &*truth_N : nullptr, &M_raw);

    write_signal(report.M_rec, path_in(dir, "M_rec.csv"));
    write_signal(report.N_rec, path_in(dir, "N_rec.csv"));

    ordered_json j;
    j["method"] = method_name(cfg.inverse.method);
    j["seed"] = report.seed;
    j["rel_l2_M"] = report.rel_l2_M ? ordered_json(*report.rel_l2_M) : ordered_json(nullptr);
    j["rel_l2_N"] = report.rel_l2_N ? ordered_json(*report.rel_l2_N) : ordered_json(nullptr);
    j["files"] = {{"M_rec", "M_rec.csv"}, {"N_rec", "N_rec.csv"}};
    j["config"] = ordered_json::parse(cfg.to_json_string());
    std::ofstream rf(path_in(dir, "report.json"));
    if (!rf) throw IoError("cannot open report.json for writing");
    rf << j.dump(2) << "\n";

    if (truth_M && truth_N) {
        write_plot(path_in(dir, "plot_M.csv"), *truth_M, M_raw, report.M_rec);
        write_plot(path_in(dir, "plot_N.csv"), *truth_N, report.N_rec,
                   moving_average(report.N_rec, cfg.inverse.average_halfwidth));
    }
    return report;
}

std::vector<SweepRow> run_pipeline(const ExperimentConfig& cfg, const std::string& dir,
                                   int sweep_count) {
    const ForwardData fwd = run_forward(cfg);
    write_simulation(fwd, cfg, dir);
    run_identify(cfg, dir);

    std::vector<SweepRow> rows;
    if (sweep_count > 0) {
        for (int k = 0; k < sweep_count; ++k) {
            const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(k);
            const MeasurementSet meas = corrupt(fwd, cfg, seed);
            const ReconstructionReport rep = identify_measurements(
                meas, fwd.g, cfg, fwd.gamma, &fwd.truth_M, &fwd.truth_N);
            rows.push_back({seed, rep.rel_l2_M.value(), rep.rel_l2_N.value()});
        }
        std::ofstream sf(path_in(dir, "sweep_summary.csv"));
        if (!sf) throw IoError("cannot open sweep_summary.csv for writing");
        sf << "seed,rel_l2_M,rel_l2_N\n";
        char buf[96];
        for (const SweepRow& row : rows) {
            std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g\n",
                          static_cast<unsigned long long>(row.seed), row.rel_l2_M,
                          row.rel_l2_N);
            sf << buf;
        }
    }
    return rows;
}

} // namespace kernid
