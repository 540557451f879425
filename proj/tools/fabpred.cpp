// Command-line surface: prediction intervals and regions for user data,
// coverage/risk simulations, and the figure tables. Output is RFC-4180-style
// CSV with 9-significant-digit reals, a `# rows=` trailer, and a `# config=`
// trailer that echoes every flag so a run can be reproduced bit-exactly.
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure.

#include <CLI11.hpp>
#include <algorithm>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fab/conformal.hpp"
#include "fab/experiments.hpp"
#include "fab/figures.hpp"
#include "fab/normal_model.hpp"
#include "fab/regression.hpp"

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt9(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_lambda(const std::string& s) {
    if (s == "inf" || s == "Inf" || s == "INF") return kInf;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("--lambda expects a positive number or 'inf', got '" + s + "'");
    }
}

std::vector<double> parse_list(const std::string& s, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError(std::string(flag) + ": cannot parse '" + tok + "' as a number");
        }
    }
    if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
    return out;
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open matrix file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        for (char& c : line) {
            if (c == ',' || c == '\t') c = ' ';
        }
        std::stringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw UsageError("matrix file '" + path + "' has no rows");
    const std::size_t ncol = rows.front().size();
    Eigen::MatrixXd m(static_cast<int>(rows.size()), static_cast<int>(ncol));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != ncol) {
            throw UsageError("matrix file '" + path + "' has ragged rows");
        }
        for (std::size_t j = 0; j < ncol; ++j) m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    return m;
}

// Echoes every configuring flag of the parsed subcommand as name=value pairs.
std::string config_trailer(const CLI::App* sub) {
    std::ostringstream os;
    os << "# config=" << sub->get_name();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "out" || name == "config" || name == "help") continue;
        std::string value;
        if (opt->count() > 0) {
            const auto& results = opt->results();
            for (std::size_t i = 0; i < results.size(); ++i) {
                if (i) value += ',';
                value += results[i];
            }
        } else {
            value = opt->get_default_str();
        }
        if (value.empty()) continue;
        os << ' ' << name << '=' << value;
    }
    return os.str();
}

struct Output {
    std::ostream* os = &std::cout;
    std::ofstream file;

    void open(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw UsageError("cannot open output file '" + path + "'");
        os = &file;
    }
};

void write_table(Output& out, const std::vector<std::string>& cols,
                 const std::vector<std::vector<double>>& rows, std::uint64_t seed,
                 const std::string& trailer) {
    std::ostream& os = *out.os;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) os << ',';
        os << cols[i];
    }
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << fmt9(row[i]);
        }
        os << '\n';
    }
    os << "# rows=" << rows.size() << " seed=" << seed << '\n';
    os << trailer << '\n';
}

std::string quantity_name(fab::Quantity q) {
    return q == fab::Quantity::coverage ? "coverage" : "expected_measure";
}

std::vector<std::vector<double>> report_rows(const fab::SimReport& rep) {
    return {{rep.estimate, rep.std_error, static_cast<double>(rep.n_reps),
             static_cast<double>(rep.seed)}};
}

// --- subcommand handlers ----------------------------------------------------

struct NormalIntervalArgs {
    double x = 0.0, k = 1.0, sigma2 = 1.0, mu = 0.0, alpha = 0.1;
    std::string lambda = "inf";
    int resolution = 2048;
    std::string out;
};

int run_normal_interval(const NormalIntervalArgs& a, const CLI::App* sub) {
    const fab::NormalFabConfig cfg(a.k, a.sigma2, a.mu, parse_lambda(a.lambda), a.alpha);
    const fab::RegionResult res = fab::fab_interval_1d(a.x, cfg, a.resolution);
    Output out;
    out.open(a.out);
    std::vector<std::vector<double>> rows;
    for (const fab::Interval& iv : res.intervals) {
        rows.push_back({iv.lo, iv.hi, iv.length()});
    }
    write_table(out, {"lo", "hi", "width"}, rows, 0, config_trailer(sub));
    return 0;
}

struct NormalRegionArgs {
    std::string x = "0,0", mu = "0,0", sigma = "";
    double k = 1.0, sigma2 = 1.0, alpha = 0.1;
    std::string lambda = "inf";
    int grid = 512;
    std::string out;
};

int run_normal_region2d(const NormalRegionArgs& a, const CLI::App* sub) {
    const std::vector<double> xs = parse_list(a.x, "--x");
    const std::vector<double> mus = parse_list(a.mu, "--mu");
    if (xs.size() != 2 || mus.size() != 2) {
        throw UsageError("normal-region2d expects 2-vectors for --x and --mu");
    }
    Eigen::MatrixXd sigma(2, 2);
    if (a.sigma.empty()) {
        sigma = a.sigma2 * Eigen::MatrixXd::Identity(2, 2);
    } else {
        const std::vector<double> s = parse_list(a.sigma, "--Sigma");
        if (s.size() != 4) throw UsageError("--Sigma expects 4 row-major entries");
        sigma << s[0], s[1], s[2], s[3];
    }
    Eigen::VectorXd x(2), mu(2);
    x << xs[0], xs[1];
    mu << mus[0], mus[1];
    const fab::NormalFabConfig cfg(a.k, sigma, mu, parse_lambda(a.lambda), a.alpha);
    const fab::RegionResult res = fab::fab_region_2d(x, cfg, a.grid);
    Output out;
    out.open(a.out);
    write_table(out, {"area", "err_bound", "n_cells"},
                {{res.total_measure, res.err_bound, static_cast<double>(res.n_evals)}}, 0,
                config_trailer(sub));
    return 0;
}

struct RegressIntervalArgs {
    std::string u_file, x = "", x_file = "", v = "";
    std::string sigma2 = "1";
    double tau2 = 0.0, psi_scale = 0.0, alpha = 0.1;
    int split_df = 0;
    int resolution = 2048;
    std::string out;
};

int run_regress_interval(const RegressIntervalArgs& a, const CLI::App* sub) {
    const Eigen::MatrixXd u = read_matrix_file(a.u_file);
    const int n = static_cast<int>(u.rows());
    const int p = static_cast<int>(u.cols());

    Eigen::VectorXd x;
    if (!a.x_file.empty()) {
        const Eigen::MatrixXd xm = read_matrix_file(a.x_file);
        x = Eigen::Map<const Eigen::VectorXd>(xm.data(), xm.size());
    } else if (!a.x.empty()) {
        const std::vector<double> xs = parse_list(a.x, "--x");
        x = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<int>(xs.size()));
    } else {
        throw UsageError("regress-interval needs --x or --x-file");
    }
    if (x.size() != n) throw UsageError("length of x must match the design row count");

    if (a.v.empty()) throw UsageError("regress-interval needs --v");
    const std::vector<double> vs = parse_list(a.v, "--v");
    if (static_cast<int>(vs.size()) != p) {
        throw UsageError("length of v must match the design column count");
    }
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(vs.data(), p);

    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(p, p);
    if (a.tau2 > 0.0) psi = fab::RegressionFabConfig::psi_from_tau2(p, a.tau2);
    if (a.psi_scale > 0.0) psi = a.psi_scale * Eigen::MatrixXd::Identity(p, p);

    std::optional<double> sigma2;
    if (a.sigma2 != "est") {
        try {
            sigma2 = std::stod(a.sigma2);
        } catch (const std::exception&) {
            throw UsageError("--sigma2 expects a positive number or 'est'");
        }
    }
    const fab::RegressionFabConfig cfg(u, v, sigma2, psi, a.alpha);

    fab::RegionResult res;
    double sigma_source;  // 0 = known, 1 = split estimate
    if (sigma2) {
        res = fab::fab_interval_reg(x, cfg, a.resolution);
        sigma_source = 0.0;
    } else {
        const int split = a.split_df > 0 ? a.split_df : fab::default_split_df(n, p);
        const fab::SplitVariance sv = fab::split_variance_estimates(x, u, split);
        res = fab::fab_interval_reg_t(x, cfg, sv.sigma_hat2, sv.nu, sv.sigma_tilde2,
                                      a.resolution);
        sigma_source = 1.0;
    }
    Output out;
    out.open(a.out);
    std::vector<std::vector<double>> rows;
    for (const fab::Interval& iv : res.intervals) {
        rows.push_back({iv.lo, iv.hi, iv.length(), sigma_source});
    }
    write_table(out, {"lo", "hi", "width", "sigma_source"}, rows, 0, config_trailer(sub));
    return 0;
}

struct ConformalArgs {
    std::string data;
    int k_level = -1;
    double alpha = -1.0, m = 0.0, sigma2 = 1.0;
    std::string lambda = "1";
    std::string score = "postpred";
    int resolution = 2048;
    std::string out;
};

int run_conformal(const ConformalArgs& a, const CLI::App* sub) {
    const std::vector<double> data = parse_list(a.data, "--data");
    const int n = static_cast<int>(data.size());
    int k_level = a.k_level;
    if (k_level < 0) {
        if (a.alpha < 0.0) throw UsageError("conformal needs --k-level or --alpha");
        const double k_real = a.alpha * (n + 1);
        const int k = static_cast<int>(std::lround(k_real));
        if (std::fabs(k_real - k) > 1e-9 || k < 0 || k > n) {
            const int k_lo = std::max(0, std::min(n, static_cast<int>(std::floor(k_real))));
            std::ostringstream msg;
            msg << "--alpha must equal k/(n+1) for integer k; nearest feasible alpha: "
                << fmt9(static_cast<double>(k_lo) / (n + 1)) << " or "
                << fmt9(static_cast<double>(std::min(n, k_lo + 1)) / (n + 1));
            throw UsageError(msg.str());
        }
        k_level = k;
    }
    const fab::ConjugateNormalPrior prior(a.m, parse_lambda(a.lambda), a.sigma2);
    const fab::ConformalConfig cfg(data, prior, k_level);
    const fab::ConformityScore score = a.score == "absdev"
                                           ? fab::ConformityScore::neg_abs_dev_baseline
                                           : fab::ConformityScore::postpred;
    const fab::RegionResult res = fab::conformal_region(cfg, score, a.resolution);
    Output out;
    out.open(a.out);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < res.intervals.size(); ++i) {
        rows.push_back({static_cast<double>(i), res.intervals[i].lo, res.intervals[i].hi});
    }
    std::string trailer = config_trailer(sub);
    trailer += " alpha=" + fmt9(cfg.alpha());
    write_table(out, {"seg_index", "lo", "hi"}, rows, 0, trailer);
    return 0;
}

struct SimArgs {
    std::string model = "normal";
    double k = 1.0, sigma2 = 1.0, alpha = 0.1;
    std::string lambda = "1";
    std::string theta = "0";
    double beta_norm = 0.0;
    int n = 30, p = 5, vrow = 0, split_df = 0, k_level = 1, conf_n = 5;
    double m = 0.0;
    std::uint64_t useed = 1;
    long reps = 100000;
    std::uint64_t seed = 1;
    int resolution = 256, grid = 64;
    std::string out;
};

fab::SimReport dispatch_coverage(const SimArgs& a) {
    const double lambda = parse_lambda(a.lambda);
    const std::vector<double> theta = parse_list(a.theta, "--theta");
    if (a.model == "normal") {
        if (theta.size() == 1) {
            const fab::NormalFabConfig cfg(a.k, a.sigma2, 0.0, lambda, a.alpha);
            return fab::estimate_coverage_normal(cfg, Eigen::VectorXd::Constant(1, theta[0]),
                                                 a.reps, a.seed);
        }
        const int pdim = static_cast<int>(theta.size());
        const fab::NormalFabConfig cfg(a.k, a.sigma2 * Eigen::MatrixXd::Identity(pdim, pdim),
                                       Eigen::VectorXd::Zero(pdim), lambda, a.alpha);
        return fab::estimate_coverage_normal(
            cfg, Eigen::Map<const Eigen::VectorXd>(theta.data(), pdim), a.reps, a.seed);
    }
    if (a.model == "pivotal") {
        return fab::estimate_coverage_pivotal_1d(a.k, std::sqrt(a.sigma2), a.alpha, theta[0],
                                                 a.reps, a.seed);
    }
    if (a.model == "regress" || a.model == "regress-t" || a.model == "bayes-regress") {
        const Eigen::MatrixXd u = fab::correlated_design(a.n, a.p, a.useed);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(a.p);
        if (a.beta_norm != 0.0) beta.setConstant(a.beta_norm / std::sqrt(double(a.p)));
        Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(a.p, a.p);
        if (!std::isinf(lambda) && lambda > 0.0) {
            psi = fab::RegressionFabConfig::psi_from_tau2(a.p, lambda);
        }
        if (a.model == "regress") {
            const fab::RegressionFabConfig cfg(u, u.row(a.vrow).transpose(), a.sigma2, psi,
                                               a.alpha);
            return fab::estimate_coverage_regression(cfg, beta, a.reps, a.seed);
        }
        if (a.model == "bayes-regress") {
            const fab::RegressionFabConfig cfg(u, u.row(a.vrow).transpose(), a.sigma2, psi,
                                               a.alpha);
            return fab::estimate_coverage_bayes_regression(cfg, beta, a.reps, a.seed);
        }
        const fab::RegressionFabConfig cfg(u, u.row(a.vrow).transpose(), std::nullopt, psi,
                                           a.alpha);
        const int split = a.split_df > 0 ? a.split_df : fab::default_split_df(a.n, a.p);
        return fab::estimate_coverage_regression_t(cfg, beta, a.sigma2, split, a.reps, a.seed);
    }
    if (a.model == "conformal" || a.model == "conformal-absdev") {
        const fab::ConjugateNormalPrior prior(a.m, parse_lambda(a.lambda), a.sigma2);
        const auto score = a.model == "conformal" ? fab::ConformityScore::postpred
                                                  : fab::ConformityScore::neg_abs_dev_baseline;
        return fab::estimate_coverage_conformal(prior, a.k_level, a.conf_n, theta[0], score,
                                                a.reps, a.seed);
    }
    throw UsageError("unknown --model '" + a.model + "' for coverage");
}

fab::SimReport dispatch_risk(const SimArgs& a) {
    const double lambda = parse_lambda(a.lambda);
    const std::vector<double> theta = parse_list(a.theta, "--theta");
    if (a.model == "normal") {
        if (theta.size() == 1) {
            const fab::NormalFabConfig cfg(a.k, a.sigma2, 0.0, lambda, a.alpha);
            return fab::estimate_risk_normal_1d(cfg, theta[0], a.reps, a.seed, a.resolution);
        }
        if (theta.size() != 2) throw UsageError("--theta must have length 1 or 2");
        const fab::NormalFabConfig cfg(a.k, a.sigma2 * Eigen::MatrixXd::Identity(2, 2),
                                       Eigen::VectorXd::Zero(2), lambda, a.alpha);
        return fab::estimate_risk_normal_2d(
            cfg, Eigen::Map<const Eigen::VectorXd>(theta.data(), 2), a.reps, a.seed, a.grid);
    }
    if (a.model == "regress") {
        const Eigen::MatrixXd u = fab::correlated_design(a.n, a.p, a.useed);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(a.p);
        if (a.beta_norm != 0.0) beta.setConstant(a.beta_norm / std::sqrt(double(a.p)));
        Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(a.p, a.p);
        if (!std::isinf(lambda) && lambda > 0.0) {
            psi = fab::RegressionFabConfig::psi_from_tau2(a.p, lambda);
        }
        const fab::RegressionFabConfig cfg(u, u.row(a.vrow).transpose(), a.sigma2, psi,
                                           a.alpha);
        return fab::estimate_risk_regression(cfg, beta, a.reps, a.seed, a.resolution);
    }
    throw UsageError("unknown --model '" + a.model + "' for risk");
}

struct FigureArgs {
    std::string which = "fig1";
    std::uint64_t seed = 1;
    long reps = 0;
    int grid = 0, resolution = 0, vrows = 0;
    bool full = false;
    std::string out;
};

int run_figure(const FigureArgs& a, const CLI::App* sub) {
    fab::FigureOptions opt;
    if (a.reps > 0) {
        opt.fig3_reps_1d = a.reps;
        opt.fig3_reps_2d = std::max(1L, a.reps / 5);
        opt.fig4_reps = a.reps;
    }
    if (a.grid > 0) {
        opt.fig2_grid = a.grid;
        opt.fig3_grid_2d = a.grid;
    }
    if (a.resolution > 0) {
        opt.fig1_resolution = a.resolution;
        opt.fig3_resolution_1d = a.resolution;
        opt.fig4_resolution = a.resolution;
    }
    if (a.vrows > 0) opt.fig4_vrows = a.vrows;
    opt.fig4_full_vrows = a.full;

    fab::Figure which;
    if (a.which == "fig1") {
        which = fab::Figure::fig1;
    } else if (a.which == "fig2") {
        which = fab::Figure::fig2;
    } else if (a.which == "fig3") {
        which = fab::Figure::fig3;
    } else if (a.which == "fig4") {
        which = fab::Figure::fig4;
    } else {
        throw UsageError("--which must be one of fig1, fig2, fig3, fig4");
    }
    const fab::FigureTable table = fab::figure_data(which, opt, a.seed);
    Output out;
    out.open(a.out);
    write_table(out, table.columns, table.rows, a.seed, config_trailer(sub));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prediction regions with exact frequentist coverage and prior-informed width"};
    app.require_subcommand(1);

    NormalIntervalArgs ni;
    CLI::App* c_ni = app.add_subcommand("normal-interval", "1D prediction interval for the normal model");
    c_ni->add_option("--x", ni.x, "observed value")->capture_default_str();
    c_ni->add_option("--k", ni.k, "variance ratio of x")->capture_default_str();
    c_ni->add_option("--sigma2", ni.sigma2, "known variance")->capture_default_str();
    c_ni->add_option("--mu", ni.mu, "prior mean")->capture_default_str();
    c_ni->add_option("--lambda", ni.lambda, "prior variance multiplier or 'inf'")->capture_default_str();
    c_ni->add_option("--alpha", ni.alpha, "miscoverage level")->check(CLI::Range(1e-9, 1.0 - 1e-9))->capture_default_str();
    c_ni->add_option("--resolution", ni.resolution, "inversion grid points")->capture_default_str();
    c_ni->add_option("--out", ni.out, "output file (default stdout)");

    NormalRegionArgs nr;
    CLI::App* c_nr = app.add_subcommand("normal-region2d", "2D prediction region for the normal model");
    c_nr->add_option("--x", nr.x, "observed 2-vector a,b")->capture_default_str();
    c_nr->add_option("--k", nr.k, "variance ratio of x")->capture_default_str();
    c_nr->add_option("--sigma2", nr.sigma2, "isotropic variance (Sigma = sigma2 I)")->capture_default_str();
    c_nr->add_option("--Sigma", nr.sigma, "full 2x2 covariance, row-major s11,s12,s21,s22");
    c_nr->add_option("--mu", nr.mu, "prior mean 2-vector")->capture_default_str();
    c_nr->add_option("--lambda", nr.lambda, "prior variance multiplier or 'inf'")->capture_default_str();
    c_nr->add_option("--alpha", nr.alpha, "miscoverage level")->check(CLI::Range(1e-9, 1.0 - 1e-9))->capture_default_str();
    c_nr->add_option("--grid", nr.grid, "cells per axis")->capture_default_str();
    c_nr->add_option("--out", nr.out, "output file (default stdout)");

    RegressIntervalArgs ri;
    CLI::App* c_ri = app.add_subcommand("regress-interval", "prediction interval for the linear model");
    c_ri->add_option("--U-file", ri.u_file, "design matrix file (rows of numbers)")->required();
    c_ri->add_option("--x", ri.x, "response vector, comma separated");
    c_ri->add_option("--x-file", ri.x_file, "response vector file");
    c_ri->add_option("--v", ri.v, "target covariate vector, comma separated");
    c_ri->add_option("--sigma2", ri.sigma2, "known variance or 'est'")->capture_default_str();
    c_ri->add_option("--tau2", ri.tau2, "prior variance scale (Psi = I/tau2)")->capture_default_str();
    c_ri->add_option("--psi-scale", ri.psi_scale, "prior precision scale (Psi = s I)")->capture_default_str();
    c_ri->add_option("--alpha", ri.alpha, "miscoverage level")->check(CLI::Range(1e-9, 1.0 - 1e-9))->capture_default_str();
    c_ri->add_option("--split-df", ri.split_df, "df given to the shift-scale estimate (0 = auto)")->capture_default_str();
    c_ri->add_option("--resolution", ri.resolution, "inversion grid points")->capture_default_str();
    c_ri->add_option("--out", ri.out, "output file (default stdout)");

    ConformalArgs co;
    CLI::App* c_co = app.add_subcommand("conformal", "distribution-free interval by rank inversion");
    c_co->add_option("--data", co.data, "observed sample, comma separated")->required();
    c_co->add_option("--k-level", co.k_level, "rank level k, alpha = k/(n+1)");
    c_co->add_option("--alpha", co.alpha, "miscoverage level, must be k/(n+1)");
    c_co->add_option("--m", co.m, "prior mean")->capture_default_str();
    c_co->add_option("--lambda", co.lambda, "prior variance multiplier or 'inf'")->capture_default_str();
    c_co->add_option("--sigma2", co.sigma2, "known data variance")->capture_default_str();
    c_co->add_option("--score", co.score, "conformity score: postpred or absdev")->capture_default_str();
    c_co->add_option("--resolution", co.resolution, "inversion grid points")->capture_default_str();
    c_co->add_option("--out", co.out, "output file (default stdout)");

    SimArgs cov;
    CLI::App* c_cov = app.add_subcommand("coverage", "Monte Carlo coverage of a region procedure");
    SimArgs rsk;
    CLI::App* c_rsk = app.add_subcommand("risk", "Monte Carlo expected measure of a region procedure");
    for (auto [c, args] : {std::pair{c_cov, &cov}, std::pair{c_rsk, &rsk}}) {
        c->add_option("--model", args->model,
                      "normal|pivotal|regress|regress-t|bayes-regress|conformal|conformal-absdev")
            ->capture_default_str();
        c->add_option("--k", args->k, "variance ratio of x")->capture_default_str();
        c->add_option("--sigma2", args->sigma2, "model variance")->capture_default_str();
        c->add_option("--alpha", args->alpha, "miscoverage level")->check(CLI::Range(1e-9, 1.0 - 1e-9))->capture_default_str();
        c->add_option("--lambda", args->lambda, "prior scale (tau2 for regress models) or 'inf'")->capture_default_str();
        c->add_option("--theta", args->theta, "true parameter (scalar or comma vector)")->capture_default_str();
        c->add_option("--beta-norm", args->beta_norm, "norm of the true coefficient vector")->capture_default_str();
        c->add_option("--n", args->n, "design rows for regress models")->capture_default_str();
        c->add_option("--p", args->p, "design columns for regress models")->capture_default_str();
        c->add_option("--vrow", args->vrow, "design row used as target covariates")->capture_default_str();
        c->add_option("--split-df", args->split_df, "df for the shift-scale estimate (0 = auto)")->capture_default_str();
        c->add_option("--useed", args->useed, "seed for the generated design")->capture_default_str();
        c->add_option("--k-level", args->k_level, "conformal rank level")->capture_default_str();
        c->add_option("--conf-n", args->conf_n, "conformal sample size")->capture_default_str();
        c->add_option("--m", args->m, "conformal prior mean")->capture_default_str();
        c->add_option("--reps", args->reps, "Monte Carlo replicates")->capture_default_str();
        c->add_option("--seed", args->seed, "master seed")->capture_default_str();
        c->add_option("--resolution", args->resolution, "inversion grid points (risk)")->capture_default_str();
        c->add_option("--grid", args->grid, "cells per axis (2D risk)")->capture_default_str();
        c->add_option("--out", args->out, "output file (default stdout)");
    }

    FigureArgs fg;
    CLI::App* c_fg = app.add_subcommand("figure", "emit one of the summary tables");
    c_fg->add_option("--which", fg.which, "fig1|fig2|fig3|fig4")->capture_default_str();
    c_fg->add_option("--seed", fg.seed, "master seed")->capture_default_str();
    c_fg->add_option("--reps", fg.reps, "override Monte Carlo replicates")->capture_default_str();
    c_fg->add_option("--grid", fg.grid, "override cell grids")->capture_default_str();
    c_fg->add_option("--resolution", fg.resolution, "override inversion resolution")->capture_default_str();
    c_fg->add_option("--vrows", fg.vrows, "design rows averaged in fig4")->capture_default_str();
    c_fg->add_flag("--full", fg.full, "sweep every design row in fig4");
    c_fg->add_option("--out", fg.out, "output file (default stdout)");

    // --config FILE: flat key=value lines mirroring the flags; explicit flags win
    std::vector<std::string> args;
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string tok = argv[i];
        if (tok == "--config") {
            if (i + 1 >= argc) {
                std::cerr << "usage error: --config needs a file path\n";
                return 2;
            }
            config_path = argv[++i];
        } else if (tok.rfind("--config=", 0) == 0) {
            config_path = tok.substr(9);
        } else {
            args.push_back(tok);
        }
    }
    if (!config_path.empty()) {
        std::ifstream cfg_in(config_path);
        if (!cfg_in) {
            std::cerr << "usage error: cannot open config file '" << config_path << "'\n";
            return 2;
        }
        std::string line;
        while (std::getline(cfg_in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                std::cerr << "usage error: config line '" << line << "' is not key=value\n";
                return 2;
            }
            const std::string flag = "--" + line.substr(0, eq);
            if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
            args.push_back(flag);
            args.push_back(line.substr(eq + 1));
        }
    }
    std::vector<const char*> argv2;
    argv2.push_back(argv[0]);
    for (const std::string& a : args) argv2.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv2.size()), argv2.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 2;
    }

    try {
        if (c_ni->parsed()) return run_normal_interval(ni, c_ni);
        if (c_nr->parsed()) return run_normal_region2d(nr, c_nr);
        if (c_ri->parsed()) return run_regress_interval(ri, c_ri);
        if (c_co->parsed()) return run_conformal(co, c_co);
        if (c_cov->parsed()) {
            const fab::SimReport rep = dispatch_coverage(cov);
            Output out;
            out.open(cov.out);
            std::ostream& os = *out.os;
            os << "quantity,estimate,std_error,n_reps,seed\n";
            os << quantity_name(rep.quantity) << ',' << fmt9(rep.estimate) << ','
               << fmt9(rep.std_error) << ',' << rep.n_reps << ',' << rep.seed << '\n';
            os << "# rows=1 seed=" << rep.seed << '\n';
            os << config_trailer(c_cov) << '\n';
            return 0;
        }
        if (c_rsk->parsed()) {
            const fab::SimReport rep = dispatch_risk(rsk);
            Output out;
            out.open(rsk.out);
            std::ostream& os = *out.os;
            os << "quantity,estimate,std_error,n_reps,seed\n";
            os << quantity_name(rep.quantity) << ',' << fmt9(rep.estimate) << ','
               << fmt9(rep.std_error) << ',' << rep.n_reps << ',' << rep.seed << '\n';
            os << "# rows=1 seed=" << rep.seed << '\n';
            os << config_trailer(c_rsk) << '\n';
            return 0;
        }
        if (c_fg->parsed()) return run_figure(fg, c_fg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
