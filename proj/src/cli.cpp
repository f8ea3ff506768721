#include "fbcap/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace fbcap::cli {

namespace {

using nlohmann::json;

// Value as it prints with 9 significant digits; NaN becomes null.
json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return std::stod(format_number(x));
}

std::vector<double> read_array(const json& doc, const char* key) {
    const json& arr = doc.at(key);
    if (!arr.is_array()) throw SpecFormatError(std::string("'") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const json& x : arr) {
        if (!x.is_number()) throw SpecFormatError(std::string("'") + key + "' must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

double read_number(const json& doc, const char* key) {
    const json& x = doc.at(key);
    if (!x.is_number()) throw SpecFormatError(std::string("'") + key + "' must be a number");
    return x.get<double>();
}

struct LoadedSpec {
    ChannelSpecFile file;
    CapacityQuery query;
};

// Loads and validates; prints the reason and returns nullopt on failure.
std::optional<LoadedSpec> load_valid(const std::filesystem::path& path, std::ostream& err) {
    try {
        ChannelSpecFile file = load_channel_spec(path);
        const auto violations = validate(file.arma());
        if (!violations.empty()) {
            for (const auto& v : violations) err << "invalid spec: " << v.message << "\n";
            return std::nullopt;
        }
        if (!(file.power > 0.0)) {
            err << "invalid spec: power must be positive\n";
            return std::nullopt;
        }
        if (file.c == 0.0) {
            err << "invalid spec: c must be nonzero\n";
            return std::nullopt;
        }
        return LoadedSpec{file, file.query()};
    } catch (const SpecFormatError& e) {
        err << "invalid spec: " << e.what() << "\n";
    } catch (const fbcap::Error& e) {
        err << "invalid spec: " << e.what() << "\n";
    }
    return std::nullopt;
}

std::string kim_cell(const CapacityQuery& query) {
    if (query.spec.p() > 1 || query.spec.q() > 1) return "";
    return format_number(kim_first_order(query));
}

double relative_gap(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

struct CheckRow {
    std::string name;
    std::string status;  // PASS, FAIL or INFO
    std::string detail;
};

std::string sci(double x) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << x;
    return os.str();
}

std::string format_roots(const RootSet& rs) {
    std::string s = "{";
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const Complex r = rs.all()[i];
        if (i) s += ", ";
        s += format_number(r.real());
        if (r.imag() != 0.0) s += (r.imag() < 0 ? "-" : "+") + format_number(std::abs(r.imag())) + "j";
    }
    return s + "}";
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

ChannelSpecFile parse_channel_spec(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecFormatError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SpecFormatError("channel spec must be a JSON object");
    static const char* const kKnown[] = {"f", "g", "noise_variance", "power", "c"};
    for (const auto& item : doc.items()) {
        if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) { return item.key() == k; }) ==
            std::end(kKnown)) {
            throw SpecFormatError("unknown key '" + item.key() + "'");
        }
    }
    for (const char* key : {"f", "g", "noise_variance", "power"}) {
        if (!doc.contains(key)) throw SpecFormatError(std::string("missing key '") + key + "'");
    }
    ChannelSpecFile out;
    out.f = read_array(doc, "f");
    out.g = read_array(doc, "g");
    out.noise_variance = read_number(doc, "noise_variance");
    out.power = read_number(doc, "power");
    if (doc.contains("c")) out.c = read_number(doc, "c");
    return out;
}

ChannelSpecFile load_channel_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SpecFormatError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_channel_spec(buf.str());
}

std::vector<double> sweep_grid(const SweepOptions& opts) {
    if (!opts.powers.empty()) {
        std::vector<double> grid = opts.powers;
        for (double p : grid) {
            if (!(p > 0.0) || !std::isfinite(p)) throw InvalidInput("sweep powers must be positive");
        }
        std::sort(grid.begin(), grid.end());
        return grid;
    }
    if (!(opts.power_min > 0.0) || !(opts.power_max > opts.power_min) || !std::isfinite(opts.power_max)) {
        throw InvalidInput("sweep needs 0 < power-min < power-max");
    }
    if (opts.points < 2) throw InvalidInput("sweep needs at least 2 points");
    std::vector<double> grid(opts.points);
    const double last = static_cast<double>(opts.points - 1);
    for (std::size_t i = 0; i < opts.points; ++i) {
        const double t = static_cast<double>(i) / last;
        grid[i] = opts.log_spacing ? opts.power_min * std::pow(opts.power_max / opts.power_min, t)
                                   : opts.power_min + (opts.power_max - opts.power_min) * t;
    }
    grid.front() = opts.power_min;
    grid.back() = opts.power_max;
    return grid;
}

int cmd_validate(const std::filesystem::path& spec, std::ostream& out, std::ostream& err) {
    const auto loaded = load_valid(spec, err);
    if (!loaded) return kExitInvalidSpec;
    out << "ok\n";
    return kExitOk;
}

int cmd_capacity(const std::filesystem::path& spec, bool as_json, std::ostream& out, std::ostream& err) {
    const auto loaded = load_valid(spec, err);
    if (!loaded) return kExitInvalidSpec;
    const CapacityQuery& query = loaded->query;
    try {
        const CapacityBound bound = lower_bound(query);
        const double power = achieved_power(bound.signed_plant(query.c), query.spec);
        const std::string kim = kim_cell(query);
        if (as_json) {
            json roots = json::array();
            for (double r : bound.all_real_roots) roots.push_back(number(r));
            json doc = {
                {"a_bar", number(bound.a_bar)},
                {"capacity_bits", number(bound.capacity_bits)},
                {"variant", to_string(bound.variant)},
                {"loop_verdict", to_string(bound.loop_verdict)},
                {"achieved_power", number(power)},
                {"power", number(query.power)},
                {"snr", number(query.snr())},
                {"residual", number(bound.residual)},
                {"real_roots", roots},
                {"kim_bits", kim.empty() ? json(nullptr) : number(kim_first_order(query))},
            };
            out << doc.dump(2) << "\n";
        } else {
            out << "a_bar           " << format_number(bound.a_bar) << "\n"
                << "capacity_bits   " << format_number(bound.capacity_bits) << "\n"
                << "variant         " << to_string(bound.variant) << "\n"
                << "loop_verdict    " << to_string(bound.loop_verdict) << "\n"
                << "achieved_power  " << format_number(power) << "\n";
            if (!kim.empty()) out << "kim_bits        " << kim << "\n";
        }
        return kExitOk;
    } catch (const fbcap::Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int cmd_sweep(const std::filesystem::path& spec, const SweepOptions& opts, std::ostream& out, std::ostream& err) {
    const auto loaded = load_valid(spec, err);
    if (!loaded) return kExitInvalidSpec;
    std::vector<double> grid;
    try {
        grid = sweep_grid(opts);
    } catch (const fbcap::Error& e) {
        err << "invalid sweep: " << e.what() << "\n";
        return kExitInvalidSpec;
    }

    std::ostringstream csv;
    csv << kSweepHeader << "\n";
    bool failed = false;
    for (double power : grid) {
        CapacityQuery query = loaded->query;
        query.power = power;
        csv << format_number(power) << "," << format_number(query.snr()) << ",";
        try {
            const CapacityBound bound = lower_bound(query);
            csv << format_number(bound.a_bar) << "," << to_string(bound.variant) << ","
                << format_number(bound.capacity_bits) << "," << kim_cell(query) << ","
                << to_string(bound.loop_verdict) << "\n";
        } catch (const fbcap::Error& e) {
            csv << ",error,,,\n";
            err << "power " << format_number(power) << ": " << e.what() << "\n";
            failed = true;
        }
    }

    if (opts.out) {
        std::ofstream file(*opts.out, std::ios::binary);
        if (!file) {
            err << "cannot write " << opts.out->string() << "\n";
            return kExitNumerical;
        }
        file << csv.str();
    } else {
        out << csv.str();
    }
    return failed ? kExitNumerical : kExitOk;
}

int cmd_simulate(const std::filesystem::path& spec, const SimulateOptions& opts, std::ostream& out,
                 std::ostream& err) {
    const auto loaded = load_valid(spec, err);
    if (!loaded) return kExitInvalidSpec;
    const CapacityQuery& query = loaded->query;
    if (opts.samples == 0) {
        err << "invalid simulation: --samples must be at least 1\n";
        return kExitInvalidSpec;
    }

    std::ofstream trace;
    if (opts.out) {
        trace.open(*opts.out, std::ios::binary);
        if (!trace) {
            err << "cannot write " << opts.out->string() << "\n";
            return kExitNumerical;
        }
        trace << kTraceHeader << "\n";
    }
    TraceSink sink;
    if (opts.out) {
        sink = [&trace](const TraceRecord& r) {
            trace << r.k << "," << format_number(r.x_tilde) << "," << format_number(r.y_prime) << ","
                  << format_number(r.e_prime) << "," << format_number(r.u) << "," << format_number(r.v) << "\n";
        };
    }

    try {
        const CapacityBound bound = lower_bound(query);
        const PlantSpec plant = bound.operating_plant(query.c);
        const SimConfig cfg{opts.samples, opts.burn_in, opts.seed};
        const SimReport report = opts.mode == SimMode::whitened ? simulate_whitened(plant, query.spec, cfg, sink)
                                                                : simulate_colored(plant, query.spec, cfg, sink);
        json doc = {
            {"mode", to_string(report.mode)},
            {"a_bar", number(bound.a_bar)},
            {"plant_a", number(plant.a)},
            {"seed", opts.seed},
            {"samples_used", report.samples_used},
            {"input_power", number(report.input_power)},
            {"innovation_variance", number(report.innovation_variance)},
            {"whiteness_max_corr", number(report.whiteness_max_corr)},
            {"predicted_input_power", number(report.predicted_input_power)},
            {"diverged", report.diverged},
            {"diverged_at", report.diverged_at ? json(*report.diverged_at) : json(nullptr)},
        };
        out << doc.dump(2) << "\n";
        if (report.diverged) {
            err << "loop diverged at step " << *report.diverged_at << "\n";
            return kExitDiverged;
        }
        return kExitOk;
    } catch (const fbcap::Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int cmd_verify(const std::filesystem::path& spec, std::ostream& out, std::ostream& err) {
    const auto loaded = load_valid(spec, err);
    if (!loaded) return kExitInvalidSpec;
    const CapacityQuery& query = loaded->query;
    const ArmaSpec& arma = query.spec;

    std::vector<CheckRow> rows;
    bool required_ok = true;
    const auto require = [&](std::string name, bool pass, std::string detail) {
        rows.push_back({std::move(name), pass ? "PASS" : "FAIL", std::move(detail)});
        required_ok = required_ok && pass;
    };
    const auto inform = [&](std::string name, std::string detail) {
        rows.push_back({std::move(name), "INFO", std::move(detail)});
    };

    try {
        const CapacityBound bound = lower_bound(query);
        const double a = bound.a_bar;
        const PlantSpec plant = bound.signed_plant(query.c);
        const KalmanSteadyState s = steady_state_colored(plant, arma);
        const double ar = arma.ar_poly().evaluate(1.0 / a);
        const double ma = arma.ma_poly().evaluate(1.0 / a);

        require("root_residual", bound.residual < 1e-9, sci(bound.residual) + " at a_bar = " + format_number(a));

        const double lhs = plant.c * plant.c * s.P * ar * ar;
        const double rhs = arma.sigma_hat_sq * (a * a - 1.0) * ma * ma;
        const double power_gap = relative_gap(lhs, rhs);
        require("power_identity", power_gap < 1e-9, "relative gap " + sci(power_gap));

        const double gain_gap = relative_gap(s.K_hat * s.c_hat, (a * a - 1.0) / a);
        require("gain_product", gain_gap < 1e-10, "K_hat * c_hat vs (a^2-1)/a, relative gap " + sci(gain_gap));

        const double innov_gap = relative_gap(s.sigma_e_sq, a * a * arma.sigma_hat_sq);
        require("innovation_variance", innov_gap < 1e-10, "relative gap " + sci(innov_gap));

        const double power = achieved_power(plant, arma);
        const double achieved_gap = relative_gap(power, query.power);
        require("achieved_power", achieved_gap < 1e-9,
                format_number(power) + " vs power " + format_number(query.power) + ", relative gap " +
                    sci(achieved_gap));

        if (arma.p() <= 1 && arma.q() <= 1) {
            const double kim = kim_first_order(query);
            const double gap = std::abs(kim - bound.capacity_bits);
            require("first_order_exact", gap < 1e-8,
                    "bound " + format_number(bound.capacity_bits) + " vs exact " + format_number(kim) + " bits");
        }

        const PlantSpec loop_plant = bound.operating_plant(query.c);
        const StabilityReport st = stability_report(loop_plant, arma);
        inform("loop_stability", std::string(to_string(st.verdict)) + " at a = " + format_number(loop_plant.a) +
                                     ", poles " + format_roots(st.poles) +
                                     (st.matches_whitened_stability ? "" : "; whitened loop is stable, transformed loop is not"));
        if (bound.a_bar < 0.0) {
            const StabilityReport signed_st = stability_report(plant, arma);
            inform("loop_stability_signed_root", std::string(to_string(signed_st.verdict)) + " at a = " +
                                                     format_number(a) + ", poles " + format_roots(signed_st.poles));
        }
        if (st.verdict == Verdict::marginal) {
            inform("rate_integral", "not evaluated: closed-loop pole on the unit circle");
        } else {
            const RateIntegral rate = rate_integral(loop_plant, arma);
            inform("rate_integral", format_number(rate.bits) + " bits vs capacity " +
                                        format_number(bound.capacity_bits) +
                                        (rate.matches_log2_a ? " (equal)" : " (differs: unstable closed-loop poles)"));
        }
    } catch (const fbcap::Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }

    for (const CheckRow& r : rows) {
        out << std::left << std::setw(28) << r.name << std::setw(6) << r.status << r.detail << "\n";
    }
    out << (required_ok ? "all unconditional identities hold" : "unconditional identity FAILED") << "\n";
    return required_ok ? kExitOk : kExitNumerical;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Feedback-capacity lower bounds for ARMA Gaussian noise channels", "fbcap"};
    app.require_subcommand(1);

    std::string spec_path;
    bool as_json = false;
    SweepOptions sweep;
    std::string sweep_out;
    SimulateOptions sim;
    std::string sim_mode = "colored";
    std::string sim_out;

    auto* validate_cmd = app.add_subcommand("validate", "Check a channel spec file");
    validate_cmd->add_option("spec", spec_path, "Channel spec JSON")->required();

    auto* capacity_cmd = app.add_subcommand("capacity", "Compute the capacity lower bound");
    capacity_cmd->add_option("spec", spec_path, "Channel spec JSON")->required();
    capacity_cmd->add_flag("--json", as_json, "Machine-readable output");

    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep the power constraint and write CSV");
    sweep_cmd->add_option("spec", spec_path, "Channel spec JSON")->required();
    sweep_cmd->add_option("--power-min", sweep.power_min, "Smallest power");
    sweep_cmd->add_option("--power-max", sweep.power_max, "Largest power");
    sweep_cmd->add_option("--points", sweep.points, "Number of grid points");
    sweep_cmd->add_flag("--log-spacing", sweep.log_spacing, "Geometric instead of linear spacing");
    sweep_cmd->add_option("--powers", sweep.powers, "Explicit power grid (overrides min/max/points)")->delimiter(',');
    sweep_cmd->add_option("--out", sweep_out, "CSV output path (default stdout)");

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a closed loop at the bound's operating point");
    simulate_cmd->add_option("spec", spec_path, "Channel spec JSON")->required();
    simulate_cmd->add_option("--mode", sim_mode, "whitened or colored")
        ->check(CLI::IsMember({"whitened", "colored"}));
    simulate_cmd->add_option("--samples", sim.samples, "Samples kept after burn-in");
    simulate_cmd->add_option("--burn-in", sim.burn_in, "Samples discarded first");
    simulate_cmd->add_option("--seed", sim.seed, "Noise generator seed");
    simulate_cmd->add_option("--out", sim_out, "Per-sample trace CSV path");

    auto* verify_cmd = app.add_subcommand("verify", "Check every identity of the construction for a spec");
    verify_cmd->add_option("spec", spec_path, "Channel spec JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalidSpec;
    }

    if (*validate_cmd) return cmd_validate(spec_path, out, err);
    if (*capacity_cmd) return cmd_capacity(spec_path, as_json, out, err);
    if (*sweep_cmd) {
        if (!sweep_out.empty()) sweep.out = sweep_out;
        return cmd_sweep(spec_path, sweep, out, err);
    }
    if (*simulate_cmd) {
        sim.mode = sim_mode == "whitened" ? SimMode::whitened : SimMode::colored;
        if (!sim_out.empty()) sim.out = sim_out;
        return cmd_simulate(spec_path, sim, out, err);
    }
    return cmd_verify(spec_path, out, err);
}

}  // namespace fbcap::cli
