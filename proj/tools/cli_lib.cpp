#include "cli_lib.hpp"

#include "noisydro/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace noisydro::cli {

using nlohmann::json;

NoiseKernel make_kernel(const KernelSpec& spec, std::size_t dim) {
    if (spec.family == "dirac") return make_dirac(dim);
    if (spec.family == "uniform") return make_uniform(spec.a, spec.b, spec.levels, dim);
    if (spec.family == "truncated_normal")
        return make_truncated_normal(spec.mu, spec.sigma, spec.a, spec.b, spec.levels, dim);
    if (spec.family == "softmax") {
        const double diam = spec.diam > 0.0 ? spec.diam : static_cast<double>(dim);
        return make_softmax(spec.a, spec.b, spec.levels, dim, diam);
    }
    if (spec.family == "bernoulli") return make_bernoulli(spec.p, spec.a, dim);
    if (spec.family == "binomial") return make_binomial(spec.p, spec.m, spec.a, dim);
    if (spec.family == "poisson") return make_poisson(spec.rate, spec.a, spec.k_max, dim);
    throw config_error("unknown kernel family: '" + spec.family + "'");
}

namespace {

std::vector<double> default_epsilons() {
    std::vector<double> eps(10);
    for (int i = 0; i < 10; ++i) eps[static_cast<std::size_t>(i)] = 0.01 + 0.01 * i;
    return eps;
}

KernelSpec parse_kernel(const json& j) {
    KernelSpec spec;
    if (j.contains("family")) spec.family = j.at("family").get<std::string>();
    if (j.contains("levels")) spec.levels = j.at("levels").get<int>();
    if (j.contains("params")) {
        const json& p = j.at("params");
        if (p.contains("a")) spec.a = p.at("a").get<double>();
        if (p.contains("b")) spec.b = p.at("b").get<double>();
        if (p.contains("mu")) spec.mu = p.at("mu").get<double>();
        if (p.contains("sigma")) spec.sigma = p.at("sigma").get<double>();
        if (p.contains("p")) spec.p = p.at("p").get<double>();
        if (p.contains("m")) spec.m = p.at("m").get<int>();
        if (p.contains("lambda_rate")) spec.rate = p.at("lambda_rate").get<double>();
        if (p.contains("k_max")) spec.k_max = p.at("k_max").get<int>();
        if (p.contains("diam")) spec.diam = p.at("diam").get<double>();
    }
    return spec;
}

GridSpec parse_grid(const json& j) {
    GridSpec g;
    if (j.contains("lo")) g.lo = j.at("lo").get<double>();
    if (j.contains("hi")) g.hi = j.at("hi").get<double>();
    if (j.contains("levels")) g.levels = j.at("levels").get<int>();
    return g;
}

Mode parse_mode(const std::string& s) {
    if (s == "direct") return Mode::Direct;
    if (s == "noisy") return Mode::Noisy;
    throw config_error("unknown mode: '" + s + "' (expected 'direct' or 'noisy')");
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.epsilons = default_epsilons();
    try {
        if (j.contains("dataset")) {
            const json& d = j.at("dataset");
            if (d.contains("path")) cfg.dataset_path = d.at("path").get<std::string>();
            if (d.contains("base_station"))
                cfg.base_station = d.at("base_station").get<std::string>();
            if (d.contains("assemble")) cfg.assemble = d.at("assemble").get<std::string>();
        }
        if (j.contains("kernel")) cfg.kernel = parse_kernel(j.at("kernel"));
        if (j.contains("grid")) cfg.grid = parse_grid(j.at("grid"));
        if (j.contains("epsilons")) cfg.epsilons = j.at("epsilons").get<std::vector<double>>();
        if (j.contains("alphas")) cfg.alphas = j.at("alphas").get<std::vector<double>>();
        if (j.contains("modes")) {
            cfg.modes.clear();
            for (const auto& m : j.at("modes"))
                cfg.modes.push_back(parse_mode(m.get<std::string>()));
        }
        if (j.contains("solver")) {
            const json& s = j.at("solver");
            if (s.contains("max_iters")) cfg.solver.max_iters = s.at("max_iters").get<int>();
            if (s.contains("step_c0")) cfg.solver.step_c0 = s.at("step_c0").get<double>();
            if (s.contains("stall_tol"))
                cfg.solver.stall_tol = s.at("stall_tol").get<double>();
            if (s.contains("stall_window"))
                cfg.solver.stall_window = s.at("stall_window").get<int>();
            if (s.contains("lambda_max"))
                cfg.solver.lambda_max = s.at("lambda_max").get<double>();
            if (s.contains("polish")) cfg.solver.polish = s.at("polish").get<bool>();
            if (s.contains("polish_iters"))
                cfg.solver.polish_iters = s.at("polish_iters").get<int>();
        }
        if (j.contains("stats")) {
            const json& s = j.at("stats");
            if (s.contains("Ns")) cfg.stats.Ns = s.at("Ns").get<std::vector<int>>();
            if (s.contains("betas"))
                cfg.stats.betas = s.at("betas").get<std::vector<double>>();
            if (s.contains("trials")) cfg.stats.trials = s.at("trials").get<int>();
            if (s.contains("c1")) cfg.stats.c1 = s.at("c1").get<double>();
            if (s.contains("c2")) cfg.stats.c2 = s.at("c2").get<double>();
            if (s.contains("a")) cfg.stats.a = s.at("a").get<double>();
            if (s.contains("consistency_beta0"))
                cfg.stats.consistency_beta0 = s.at("consistency_beta0").get<double>();
            if (s.contains("consistency_Ns"))
                cfg.stats.consistency_Ns = s.at("consistency_Ns").get<std::vector<int>>();
            if (s.contains("deltas"))
                cfg.stats.deltas = s.at("deltas").get<std::vector<double>>();
            if (s.contains("biased_N")) cfg.stats.biased_N = s.at("biased_N").get<int>();
            if (s.contains("biased_epsilon"))
                cfg.stats.biased_epsilon = s.at("biased_epsilon").get<double>();
            if (s.contains("world")) {
                const json& w = s.at("world");
                if (w.contains("grid")) cfg.stats.world.grid = parse_grid(w.at("grid"));
                if (w.contains("pmf"))
                    cfg.stats.world.pmf = w.at("pmf").get<std::vector<double>>();
                if (w.contains("kernel"))
                    cfg.stats.world.kernel = parse_kernel(w.at("kernel"));
                if (w.contains("alpha")) cfg.stats.world.alpha = w.at("alpha").get<double>();
            }
        }
        if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw config_error(std::string("bad config value: ") + e.what());
    }

    if (cfg.epsilons.empty() || cfg.alphas.empty() || cfg.modes.empty())
        throw config_error("epsilons, alphas and modes must be non-empty");
    for (double e : cfg.epsilons)
        if (!(e >= 0.0)) throw config_error("epsilon values must be >= 0");
    for (double a : cfg.alphas)
        if (!(a >= 0.0)) throw config_error("alpha values must be >= 0");
    return cfg;
}

NoisyDataset load_dataset(const ExperimentConfig& config) {
    if (config.dataset_path.empty())
        throw config_error("config needs dataset.path");
    if (config.base_station.empty())
        throw config_error("config needs dataset.base_station");
    if (config.assemble == "user_types")
        return ingest_user_type_matrix(config.dataset_path, config.base_station);
    if (config.assemble == "scalar")
        return ingest_dataset(config.dataset_path, config.base_station);
    throw config_error("dataset.assemble must be 'user_types' or 'scalar'");
}

SyntheticWorld make_world(const StatsConfig& stats, std::uint64_t seed) {
    SyntheticWorld world;
    world.grid = build_support_grid(stats.world.grid.lo, stats.world.grid.hi,
                                    stats.world.grid.levels, 1);
    if (stats.world.pmf.empty()) {
        world.pmf.assign(world.grid.size(), 1.0 / static_cast<double>(world.grid.size()));
    } else {
        world.pmf = stats.world.pmf;
    }
    world.kernel = make_kernel(stats.world.kernel, 1);
    world.utility = FairnessUtility{stats.world.alpha, 1};
    world.seed = seed;
    world.validate();
    return world;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void write_results_csv(std::ostream& out, const MetricsReport& report, std::size_t dim) {
    out << "epsilon,alpha,mode,kernel,g_star,lambda_star,poa,pof,dispersion,converged";
    for (std::size_t i = 1; i <= dim; ++i) out << ",w_" << i;
    out << "\n";
    for (const auto& row : report.rows) {
        out << format_double(row.epsilon) << ',' << format_double(row.alpha) << ','
            << mode_name(row.mode) << ',' << row.kernel << ',' << format_double(row.g_star)
            << ',' << format_double(row.lambda_star) << ','
            << (std::isnan(row.poa) ? "" : format_double(row.poa)) << ','
            << (std::isnan(row.pof) ? "" : format_double(row.pof)) << ','
            << format_double(row.dispersion) << ',' << (row.converged ? "true" : "false");
        for (double w : row.w) out << ',' << format_double(w);
        out << "\n";
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::vector<PlotRow> plotdata_rows(std::istream& results_csv) {
    std::string line;
    if (!std::getline(results_csv, line))
        throw data_error("plotdata: empty input (missing header)");
    const auto header = split_line(line);
    if (header.size() < 10 || header[0] != "epsilon" || header[1] != "alpha" ||
        header[2] != "mode")
        throw data_error("plotdata: unexpected results header");

    std::vector<PlotRow> rows;
    std::size_t line_no = 1;
    while (std::getline(results_csv, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size()) {
            std::ostringstream msg;
            msg << "plotdata: field count mismatch on line " << line_no;
            throw data_error(msg.str());
        }
        const std::string series = fields[2] + "/alpha=" + fields[1];
        for (std::size_t col = 4; col < header.size(); ++col) {
            if (fields[col].empty()) continue; // blank POA/POF cells
            rows.push_back({fields[0], series, fields[col], header[col]});
        }
    }
    return rows;
}

void write_plotdata_csv(std::ostream& out, const std::vector<PlotRow>& rows) {
    out << "x,series,value,panel\n";
    for (const auto& r : rows)
        out << r.x << ',' << r.series << ',' << r.value << ',' << r.panel << "\n";
}

} // namespace noisydro::cli
