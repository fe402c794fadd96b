// vgtool: batch front end for the VG library.
//
// Exit codes: 0 success, 1 computation error, 2 usage error. Numbers are
// written in shortest round-trip form with a '.' decimal point, so output is
// byte-identical for identical arguments and seed.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "selftest.hpp"
#include "vg/distribution.hpp"
#include "vg/error.hpp"
#include "vg/estimation.hpp"
#include "vg/pricing.hpp"
#include "vg/process.hpp"
#include "vg/sampling.hpp"

namespace {

using json = nlohmann::ordered_json;

// Invalid flag values detected before any computation starts.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json };

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Non-finite values have no JSON literal; they are written as null.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json params_json(const vg::VgParams& p) {
    return json{{"r", p.r}, {"theta", p.theta}, {"sigma", p.sigma}, {"mu", p.mu}};
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw UsageError("cannot open output file " + path);
        }
    }
    std::ostream& out() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("VG_SEED")) {
        std::uint64_t s = 0;
        const std::string_view sv(env);
        const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), s);
        if (res.ec != std::errc() || res.ptr != sv.data() + sv.size()) throw UsageError("VG_SEED must be an unsigned integer");
        return s;
    }
    return 1;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Single numeric column; '#' lines and blank lines skipped; the first
// non-comment line may be a header.
std::vector<double> read_column(std::istream& in, const std::string& name) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        double v = 0.0;
        const char* begin = s.data();
        if (*begin == '+') ++begin;
        const auto res = std::from_chars(begin, s.data() + s.size(), v);
        const bool ok = res.ec == std::errc() && res.ptr == s.data() + s.size();
        if (!ok) {
            if (first) {
                first = false;
                continue;
            }
            throw vg::Error(name + ":" + std::to_string(line_no) + ": not a number: " + std::string(s));
        }
        first = false;
        values.push_back(v);
    }
    return values;
}

struct ParamFlags {
    double r = 1.0;
    double theta = 0.0;
    double sigma = 1.0;
    double mu = 0.0;

    void add(CLI::App* app) {
        app->add_option("--r", r, "shape r > 0")->required();
        app->add_option("--theta", theta, "skewness parameter")->capture_default_str();
        app->add_option("--sigma", sigma, "scale sigma > 0")->required();
        app->add_option("--mu", mu, "location")->capture_default_str();
    }
    vg::VgParams get() const {
        try {
            return vg::make_params(r, theta, sigma, mu);
        } catch (const vg::DomainError& e) {
            throw UsageError(e.what());
        }
    }
};

void add_format(CLI::App* app, Format& f) {
    app->add_option("--format", f, "output format")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"csv", Format::Csv}, {"json", Format::Json}}));
}

// ---- subcommands -------------------------------------------------------------

void cmd_describe(const vg::VgParams& p, Format, std::ostream& os) {
    const vg::MomentSet m = vg::moments_summary(p);
    const auto kappa = vg::cumulants(p, 6);
    json k = json::array();
    for (std::size_t i = 1; i <= 6; ++i) k.push_back(kappa[i]);
    json j{{"params", params_json(p)},
           {"mean", m.mean},
           {"variance", m.variance},
           {"skewness", m.skewness},
           {"kurtosis", m.kurtosis},
           {"excess_kurtosis", m.excess_kurtosis},
           {"cumulants", k},
           {"mode", vg::mode(p).mode},
           {"median", vg::median(p)}};
    os << j.dump(2) << '\n';
}

void cmd_table(const vg::VgParams& p, bool is_cdf, double from, double to, int points, Format f, std::ostream& os) {
    std::vector<double> xs(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        xs[static_cast<std::size_t>(i)] = points == 1 ? from : from + (to - from) * i / (points - 1);
    std::vector<double> ys(xs.size());
    if (is_cdf) {
        vg::cdf_sorted(p, xs, ys);
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = vg::pdf(p, xs[i]);
    }
    const char* name = is_cdf ? "cdf" : "pdf";
    if (f == Format::Json) {
        json rows = json::array();
        for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back(json{{"x", xs[i]}, {"value", jnum(ys[i])}});
        os << json{{"function", name}, {"params", params_json(p)}, {"rows", rows}}.dump(2) << '\n';
        return;
    }
    os << "x,value\n";
    for (std::size_t i = 0; i < xs.size(); ++i) os << num(xs[i]) << ',' << num(ys[i]) << '\n';
}

void cmd_quantile(const vg::VgParams& p, const std::vector<double>& probs, Format f, std::ostream& os) {
    std::vector<double> q(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) q[i] = vg::quantile(p, probs[i]);
    if (f == Format::Json) {
        json rows = json::array();
        for (std::size_t i = 0; i < q.size(); ++i) rows.push_back(json{{"p", probs[i]}, {"quantile", jnum(q[i])}});
        os << json{{"params", params_json(p)}, {"rows", rows}}.dump(2) << '\n';
        return;
    }
    os << "p,quantile\n";
    for (std::size_t i = 0; i < q.size(); ++i) os << num(probs[i]) << ',' << num(q[i]) << '\n';
}

const char* method_str(vg::FitMethod m) {
    switch (m) {
        case vg::FitMethod::MoM: return "mom";
        case vg::FitMethod::MLE: return "mle";
        case vg::FitMethod::ECM: return "ecm";
    }
    return "?";
}

void cmd_fit(const std::string& method, const std::string& input, bool symmetric, Format, std::ostream& os) {
    std::vector<double> values;
    if (input == "-") {
        values = read_column(std::cin, "stdin");
    } else {
        std::ifstream in(input, std::ios::binary);
        if (!in) throw UsageError("cannot open input file " + input);
        values = read_column(in, input);
    }
    const vg::DataSet data = vg::make_dataset(std::move(values), input);
    vg::FitResult r;
    if (method == "mom") {
        r = symmetric ? vg::mom_symmetric(data) : vg::mom_general(data);
    } else if (method == "mle") {
        r = vg::mle_fit(data);
    } else {
        r = vg::ecm_fit(data);
    }
    if (method == "mom") r.loglik = -vg::negative_log_likelihood(data, r.params);
    json trace = json::array();
    for (double v : r.loglik_trace) trace.push_back(jnum(v));
    json j{{"method", method_str(r.method)},
           {"symmetric", symmetric},
           {"n", data.observations.size()},
           {"params", params_json(r.params)},
           {"loglik", jnum(r.loglik)},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"objective", jnum(r.objective)},
           {"singular", r.singular},
           {"loglik_trace", trace}};
    os << j.dump(2) << '\n';
}

vg::SampleMethod sample_method(const std::string& m) {
    if (m == "ng") return vg::SampleMethod::NormalGamma;
    if (m == "gd") return vg::SampleMethod::GammaDifference;
    if (m == "np") return vg::SampleMethod::NormalProducts;
    return vg::SampleMethod::UniformLog;
}

void cmd_sample(const vg::VgParams& p, std::size_t n, const std::string& method, std::uint64_t seed, Format f,
                std::ostream& os) {
    vg::RngStream rng(seed);
    const auto batch = vg::sample_vg(p, sample_method(method), rng, n);
    if (f == Format::Json) {
        os << json{{"method", method}, {"seed", seed}, {"params", params_json(p)}, {"values", batch.values}}.dump(2)
           << '\n';
        return;
    }
    os << "value\n";
    for (double v : batch.values) os << num(v) << '\n';
}

void cmd_simulate(const vg::VgProcessParams& pp, double t, std::size_t steps, std::size_t paths,
                  const std::string& construction, std::uint64_t seed, Format f, std::ostream& os) {
    vg::RngStream rng(seed);
    const auto grid = vg::uniform_grid(t, steps);
    const bool gd = construction == "gamma-difference";
    json jpaths = json::array();
    if (f == Format::Csv) os << "path_id,time,value\n";
    for (std::size_t id = 0; id < paths; ++id) {
        const vg::PathGrid path =
            gd ? vg::simulate_path_gamma_difference(pp, grid, rng) : vg::simulate_path_subordinator(pp, grid, rng);
        if (f == Format::Json) {
            jpaths.push_back(json{{"path_id", id}, {"values", path.values}});
        } else {
            for (std::size_t k = 0; k < path.times.size(); ++k)
                os << id << ',' << num(path.times[k]) << ',' << num(path.values[k]) << '\n';
        }
    }
    if (f == Format::Json) {
        os << json{{"construction", gd ? "gamma-difference" : "subordinator"},
                   {"seed", seed},
                   {"process", json{{"sigma", pp.sigma}, {"nu", pp.nu}, {"theta", pp.theta}}},
                   {"times", grid},
                   {"paths", jpaths}}
                  .dump(2)
           << '\n';
    }
}

void cmd_price(const std::string& method, const vg::PricingInputs& inp, double damping, Format, std::ostream& os) {
    const vg::CallPrice c = method == "quad" ? vg::call_gamma_quadrature(inp) : vg::call_cf_inversion(inp, damping);
    const auto& m = inp.model;
    json j{{"method", method},
           {"s0", m.s0},
           {"strike", inp.strike},
           {"rate", m.rate_or_drift},
           {"maturity", inp.maturity},
           {"process", json{{"sigma", m.pp.sigma}, {"nu", m.pp.nu}, {"theta", m.pp.theta}}},
           {"omega", m.omega},
           {"price", c.price},
           {"abs_error", c.abs_error}};
    if (method == "cf") j["damping"] = damping;
    os << j.dump(2) << '\n';
}

int cmd_selftest(const std::vector<int>& only, Format f, std::ostream& os) {
    const auto results = vg::selftest::run(only);
    bool all = true;
    json rows = json::array();
    for (const auto& r : results) {
        all = all && r.pass;
        if (f == Format::Json) {
            rows.push_back(json{{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
        } else {
            os << vg::selftest::format_line(r) << std::endl;
        }
    }
    if (f == Format::Json) os << json{{"pass", all}, {"criteria", rows}}.dump(2) << '\n';
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variance-gamma distribution toolkit"};
    app.require_subcommand(1);
    std::string output;
    app.add_option("-o,--output", output, "output file (default stdout)");

    Format fmt_describe = Format::Json, fmt_table = Format::Csv, fmt_quantile = Format::Csv, fmt_fit = Format::Json,
           fmt_sample = Format::Csv, fmt_simulate = Format::Csv, fmt_price = Format::Json, fmt_selftest = Format::Csv;
    std::optional<std::uint64_t> seed_flag;

    auto* describe = app.add_subcommand("describe", "moments, cumulants, mode and median as JSON");
    ParamFlags describe_p;
    describe_p.add(describe);
    add_format(describe, fmt_describe);

    double from = -5.0, to = 5.0;
    int points = 101;
    ParamFlags table_p;
    auto* pdf_cmd = app.add_subcommand("pdf", "density table (x, value)");
    auto* cdf_cmd = app.add_subcommand("cdf", "distribution function table (x, value)");
    for (auto* c : {pdf_cmd, cdf_cmd}) {
        table_p.add(c);
        c->add_option("--from", from, "first x")->capture_default_str();
        c->add_option("--to", to, "last x")->capture_default_str();
        c->add_option("--points", points, "number of grid points")->check(CLI::Range(1, 10'000'000))->capture_default_str();
        add_format(c, fmt_table);
    }

    auto* quantile_cmd = app.add_subcommand("quantile", "quantiles at the given probabilities");
    ParamFlags quantile_p;
    quantile_p.add(quantile_cmd);
    std::vector<double> probs;
    quantile_cmd->add_option("--p", probs, "probabilities in (0, 1)")->required()->check(CLI::Range(0.0, 1.0));
    add_format(quantile_cmd, fmt_quantile);

    auto* fit_cmd = app.add_subcommand("fit", "fit a data file; JSON FitResult");
    std::string fit_method, input;
    bool symmetric = false;
    fit_cmd->add_option("--method", fit_method, "mom|mle|ecm")->required()->check(CLI::IsMember({"mom", "mle", "ecm"}));
    fit_cmd->add_option("--input", input, "CSV file with one numeric column ('-' for stdin)")->required();
    fit_cmd->add_flag("--symmetric", symmetric, "symmetric method of moments (theta = 0)");
    add_format(fit_cmd, fmt_fit);

    auto* sample_cmd = app.add_subcommand("sample", "draw a sample");
    ParamFlags sample_p;
    sample_p.add(sample_cmd);
    std::size_t n = 1000;
    std::string sample_m = "ng";
    sample_cmd->add_option("--n", n, "sample size")->capture_default_str();
    sample_cmd->add_option("--method", sample_m, "ng|gd|np|ul")->check(CLI::IsMember({"ng", "gd", "np", "ul"}))->capture_default_str();
    sample_cmd->add_option("--seed", seed_flag, "RNG seed (default $VG_SEED, else 1)");
    add_format(sample_cmd, fmt_sample);

    auto* simulate_cmd = app.add_subcommand("simulate", "VG process paths (path_id, time, value)");
    vg::VgProcessParams pp{0.2, 0.2, 0.0};
    double horizon = 1.0;
    std::size_t steps = 100, paths = 1;
    std::string construction = "subordinator";
    simulate_cmd->add_option("--sigma", pp.sigma, "process sigma > 0")->required();
    simulate_cmd->add_option("--nu", pp.nu, "process nu > 0")->required();
    simulate_cmd->add_option("--theta", pp.theta, "process theta")->capture_default_str();
    simulate_cmd->add_option("--t", horizon, "horizon")->capture_default_str();
    simulate_cmd->add_option("--steps", steps, "grid steps")->capture_default_str();
    simulate_cmd->add_option("--paths", paths, "number of paths")->capture_default_str();
    simulate_cmd->add_option("--construction", construction, "subordinator|gamma-difference")
        ->check(CLI::IsMember({"subordinator", "gamma-difference"}))
        ->capture_default_str();
    simulate_cmd->add_option("--seed", seed_flag, "RNG seed (default $VG_SEED, else 1)");
    add_format(simulate_cmd, fmt_simulate);

    auto* price_cmd = app.add_subcommand("price", "European call price under the risk-neutral VG model");
    std::string price_m;
    double s0 = 100.0, strike = 100.0, rate = 0.0, maturity = 1.0, damping = 1.1;
    vg::VgProcessParams price_pp{0.2, 0.2, 0.0};
    price_cmd->add_option("--method", price_m, "quad|cf")->required()->check(CLI::IsMember({"quad", "cf"}));
    price_cmd->add_option("--s0", s0, "spot")->required();
    price_cmd->add_option("--k", strike, "strike")->required();
    price_cmd->add_option("--rate", rate, "risk-free rate")->required();
    price_cmd->add_option("--t", maturity, "maturity")->required();
    price_cmd->add_option("--sigma", price_pp.sigma, "process sigma > 0")->required();
    price_cmd->add_option("--nu", price_pp.nu, "process nu > 0")->required();
    price_cmd->add_option("--theta", price_pp.theta, "process theta")->required();
    price_cmd->add_option("--damping", damping, "CF damping a > 0")->capture_default_str();
    add_format(price_cmd, fmt_price);

    auto* selftest_cmd = app.add_subcommand("selftest", "run the acceptance suite");
    std::vector<int> criteria;
    selftest_cmd->add_option("--criteria", criteria, "criterion numbers (default all)")->check(CLI::Range(1, 11));
    add_format(selftest_cmd, fmt_selftest);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\nrun with --help for usage\n";
        return 2;
    }

    // Stage 1: flag validation (exit 2). Stage 2: computation (exit 1).
    std::function<int(std::ostream&)> job;
    try {
        const std::uint64_t seed = seed_flag ? *seed_flag : default_seed();
        if (*describe) {
            const auto p = describe_p.get();
            job = [=](std::ostream& os) { cmd_describe(p, fmt_describe, os); return 0; };
        } else if (*pdf_cmd || *cdf_cmd) {
            const auto p = table_p.get();
            if (!std::isfinite(from) || !std::isfinite(to) || from > to) throw UsageError("need finite --from <= --to");
            const bool is_cdf = static_cast<bool>(*cdf_cmd);
            job = [=](std::ostream& os) { cmd_table(p, is_cdf, from, to, points, fmt_table, os); return 0; };
        } else if (*quantile_cmd) {
            const auto p = quantile_p.get();
            for (double q : probs)
                if (!(q > 0.0 && q < 1.0)) throw UsageError("--p values must lie strictly between 0 and 1");
            job = [=](std::ostream& os) { cmd_quantile(p, probs, fmt_quantile, os); return 0; };
        } else if (*fit_cmd) {
            if (symmetric && fit_method != "mom") throw UsageError("--symmetric applies to --method mom only");
            if (input != "-" && !std::ifstream(input)) throw UsageError("cannot open input file " + input);
            job = [=](std::ostream& os) { cmd_fit(fit_method, input, symmetric, fmt_fit, os); return 0; };
        } else if (*sample_cmd) {
            const auto p = sample_p.get();
            if (n == 0) throw UsageError("--n must be positive");
            if (sample_m == "np" && p.r != std::floor(p.r))
                throw UsageError("--method np needs integer r");
            if (sample_m == "ul" && (p.r != std::floor(p.r) || std::fmod(p.r, 2.0) != 0.0))
                throw UsageError("--method ul needs even integer r");
            job = [=](std::ostream& os) { cmd_sample(p, n, sample_m, seed, fmt_sample, os); return 0; };
        } else if (*simulate_cmd) {
            try {
                pp.validate();
            } catch (const vg::DomainError& e) {
                throw UsageError(e.what());
            }
            if (!(horizon > 0.0) || !std::isfinite(horizon)) throw UsageError("--t must be positive");
            if (steps == 0 || paths == 0) throw UsageError("--steps and --paths must be positive");
            job = [=](std::ostream& os) {
                cmd_simulate(pp, horizon, steps, paths, construction, seed, fmt_simulate, os);
                return 0;
            };
        } else if (*price_cmd) {
            vg::PricingInputs inp{};
            try {
                inp = vg::PricingInputs{vg::make_stock_model(s0, rate, price_pp, vg::ModelKind::RiskNeutral), strike, maturity};
                vg::validate_pricing_inputs(inp);
            } catch (const vg::DomainError& e) {
                throw UsageError(e.what());
            }
            job = [=](std::ostream& os) { cmd_price(price_m, inp, damping, fmt_price, os); return 0; };
        } else if (*selftest_cmd) {
            job = [=](std::ostream& os) { return cmd_selftest(criteria, fmt_selftest, os); };
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        // Output goes to a buffer first so a failed computation leaves no partial file.
        std::ostringstream buf;
        const int code = job(buf);
        Output out(output);
        out.out() << buf.str();
        out.out().flush();
        if (!out.out()) throw vg::Error("write failed");
        return code;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
