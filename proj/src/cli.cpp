#include "thra/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "thra/components.hpp"
#include "thra/planner.hpp"
#include "thra/scheme.hpp"
#include "thra/security.hpp"
#include "thra/spectrum.hpp"
#include "thra/util.hpp"

namespace thra {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFindings = 2;

struct GlobalOpts {
    std::string grid_spec;
    std::string out_dir = ".";
    double chi_max = 1e-2;
    std::optional<double> ref_db;
    bool fixed_1550 = false;
    double power_w = 10.0;
    double sideband_ratio = 0.1;
    double rep_rate_hz = 1e8;

    WavelengthGrid grid() const {
        if (grid_spec.empty()) return WavelengthGrid::analysis_default();
        const auto c1 = grid_spec.find(':');
        const auto c2 = grid_spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw Error(cat("grid must be lo:hi:step in nm (got '", grid_spec, "')"));
        auto num = [&](std::size_t b, std::size_t e) {
            const std::string f = grid_spec.substr(b, e - b);
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (f.empty() || end != f.c_str() + f.size())
                throw Error(cat("grid must be lo:hi:step in nm (got '", grid_spec, "')"));
            return v;
        };
        return WavelengthGrid::uniform(num(0, c1), num(c1 + 1, c2), num(c2 + 1, grid_spec.size()));
    }

    ProbeBudget budget() const {
        ProbeBudget b;
        b.input_power_w = power_w;
        b.sideband_ratio = sideband_ratio;
        b.rep_rate_hz = rep_rate_hz;
        b.mode = fixed_1550 ? PhotonEnergyMode::kFixed1550 : PhotonEnergyMode::kPerWavelength;
        b.validate();
        return b;
    }

    std::string out_path(const std::string& filename) const {
        return (fs::path(out_dir) / filename).string();
    }
};

void note_empty_passes(const Scheme& scheme) {
    if (scheme.path.outbound.empty())
        std::fprintf(stderr, "note: scheme '%s' has an empty outbound pass\n", scheme.name.c_str());
    if (scheme.path.inbound.empty())
        std::fprintf(stderr, "note: scheme '%s' has an empty inbound pass\n", scheme.name.c_str());
}

Scheme load_scheme_with_set(const std::string& scheme_path, const std::string& components_path,
                            const GlobalOpts& g) {
    const WavelengthGrid grid = g.grid();
    Catalog catalog = load_component_set(components_path, grid);
    Scheme scheme = load_scheme(scheme_path, std::move(catalog), g.ref_db);
    note_empty_passes(scheme);
    return scheme;
}

int cmd_reduce(const std::string& raw_path, const GlobalOpts& g) {
    const RawScan raw = load_raw_scan_csv(raw_path);
    const TransmittanceSpectrum spectrum = reduce_raw_scan(raw);
    const std::string out = g.out_path(fs::path(raw_path).stem().string() + "_spectrum.csv");
    save_spectrum_csv(out, spectrum);
    std::printf("wrote %s (%zu points, %s..%s nm)\n", out.c_str(), spectrum.size(),
                format_g10(spectrum.grid.front()).c_str(), format_g10(spectrum.grid.back()).c_str());
    return kExitOk;
}

int write_synth(const Component& c, const GlobalOpts& g, const std::string& params_json) {
    const auto& d = std::get<DirectionalSpectra>(c.spectra);
    const std::string fwd_name = c.id + "_forward.csv";
    const std::string bwd_name = c.id + "_backward.csv";
    save_spectrum_csv(g.out_path(fwd_name), d.forward);
    save_spectrum_csv(g.out_path(bwd_name), d.backward);
    const std::string manifest = cat(
        "{\n"
        "  \"id\": \"", c.id, "\",\n"
        "  \"kind\": \"two_port\",\n"
        "  \"provenance\": \"synthetic\",\n"
        "  \"generator\": ", params_json, ",\n"
        "  \"legs\": {\"forward\": \"", fwd_name, "\", \"backward\": \"", bwd_name, "\"}\n"
        "}\n");
    const std::string manifest_path = g.out_path(c.id + ".json");
    atomic_write_file(manifest_path, manifest);
    std::printf("wrote %s\n", manifest_path.c_str());
    return kExitOk;
}

int cmd_compose(const std::string& scheme_path, const std::string& components_path,
                const GlobalOpts& g) {
    const Scheme scheme = load_scheme_with_set(scheme_path, components_path, g);
    const WavelengthGrid grid = g.grid();
    const TransmittanceSpectrum composite = composite_transmittance(scheme, grid);
    const std::string out = g.out_path(scheme.name + "_composite.csv");
    save_spectrum_csv(out, composite);
    const auto [mn, mx] = std::minmax_element(composite.values_db.begin(), composite.values_db.end());
    std::printf("wrote %s\n", out.c_str());
    std::printf("double-pass transmittance: max %s dB, min %s dB over %s..%s nm\n",
                format_g6(*mx).c_str(), format_g6(*mn).c_str(),
                format_g10(grid.front()).c_str(), format_g10(grid.back()).c_str());
    return kExitOk;
}

int cmd_evaluate(const std::string& scheme_path, const std::string& components_path,
                 const GlobalOpts& g) {
    const Scheme scheme = load_scheme_with_set(scheme_path, components_path, g);
    const WavelengthGrid grid = g.grid();
    const TransmittanceSpectrum composite = composite_transmittance(scheme, grid);
    const ProbeBudget budget = g.budget();
    const SecurityThresholds thresholds{g.chi_max, -140.0};
    thresholds.validate();
    const InfoBoundCurve curve = evaluate(composite, budget, thresholds);

    save_curve_csv(g.out_path(scheme.name + "_curve.csv"), curve);
    atomic_write_file(g.out_path(scheme.name + "_report.json"),
                      report_json(scheme.name, curve, budget, thresholds));
    std::printf("wrote %s\n", g.out_path(scheme.name + "_curve.csv").c_str());
    std::printf("wrote %s\n", g.out_path(scheme.name + "_report.json").c_str());

    const std::size_t w = curve.worst_index;
    std::printf("worst case: chi = %s at %s nm (t = %s dB, mu = %s)\n",
                format_g6(curve.chi[w]).c_str(), format_g10(curve.grid[w]).c_str(),
                format_g6(curve.t_db[w]).c_str(), format_g6(curve.mu_p[w]).c_str());
    if (!curve.has_loopholes()) {
        std::printf("no loopholes: chi <= %s across the band\n", format_g6(g.chi_max).c_str());
        return kExitOk;
    }
    for (const auto& l : curve.loopholes)
        std::printf("loophole: %s..%s nm\n", format_g10(l.lo_nm).c_str(), format_g10(l.hi_nm).c_str());
    return kExitFindings;
}

int cmd_plan(const std::string& scheme_path, const std::string& components_path,
             const std::string& catalog_path, const PlanConstraints& constraints_in,
             const std::string& strategy_name, const GlobalOpts& g) {
    PlanConstraints constraints = constraints_in;
    constraints.chi_max = g.chi_max;
    constraints.validate();

    const Scheme scheme = load_scheme_with_set(scheme_path, components_path, g);
    const WavelengthGrid grid = g.grid();
    const CountermeasureCatalog catalog =
        load_countermeasure_catalog(catalog_path, grid, constraints.lambda_op_nm);

    PlanStrategy strategy = PlanStrategy::kAuto;
    if (strategy_name == "exhaustive") strategy = PlanStrategy::kExhaustive;
    else if (strategy_name == "greedy") strategy = PlanStrategy::kGreedy;
    else if (strategy_name != "auto")
        throw Error(cat("unknown strategy '", strategy_name, "' (want auto, exhaustive, or greedy)"));

    const SearchResult result =
        search_min_stack(catalog, scheme, g.budget(), constraints, grid, strategy);

    const std::string out = g.out_path(scheme.name + "_plan.json");
    atomic_write_file(out, plan_json(scheme.name, result, constraints));
    std::printf("wrote %s\n", out.c_str());

    if (result.feasible) {
        std::printf("feasible plan (%s search), %d countermeasures, %s dB operating loss:\n",
                    result.strategy.c_str(), result.plan.total_count(),
                    format_g6(result.report.operating_loss_db).c_str());
        for (const auto& [id, count] : result.plan.picks)
            std::printf("  %dx %s\n", count, id.c_str());
        std::printf("worst chi %s at %s nm\n", format_g6(result.report.worst_chi).c_str(),
                    format_g10(result.report.worst_lambda_nm).c_str());
        return kExitOk;
    }
    std::printf("no feasible plan (%s search); best attempt reaches chi %s at %s nm\n",
                result.strategy.c_str(), format_g6(result.report.worst_chi).c_str(),
                format_g10(result.report.worst_lambda_nm).c_str());
    return kExitFindings;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"Wavelength-resolved Trojan-horse risk analysis for fiber-optic QKD modules"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--grid", g.grid_spec, "Analysis grid as lo:hi:step in nm (default 1500:2100:1)");
    app.add_option("--out", g.out_dir, "Output directory (default: current)");
    app.add_option("--chi-max", g.chi_max, "Tolerable leaked information in bits per pulse (default 0.01)");
    double ref_db_opt = kDefaultReflectionDb;
    auto* ref_flag = app.add_option("--ref-db", ref_db_opt,
                                    "Override the reflection point with a flat level in dB");
    app.add_flag("--fixed-1550", g.fixed_1550,
                 "Use the 1550 nm photon energy at every wavelength");
    app.add_option("--power", g.power_w, "Probe power at the fiber in W (default 10)");
    app.add_option("--sideband-ratio", g.sideband_ratio,
                   "Fraction of the returned power carrying the attack (default 0.1)");
    app.add_option("--rep-rate", g.rep_rate_hz, "Pulse repetition rate in Hz (default 1e8)");

    std::string raw_path;
    auto* reduce = app.add_subcommand("reduce", "Reduce a raw monochromator scan to a spectrum CSV");
    reduce->add_option("--raw", raw_path, "Raw scan CSV (wavelength_nm,i_ref,i_mes,t_f)")->required();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic component");
    synth->require_subcommand(1);
    std::string synth_id;
    double att_loss = 0.0;
    auto* syn_att = synth->add_subcommand("attenuator", "Flat broadband attenuator");
    syn_att->add_option("--id", synth_id, "Component id")->required();
    syn_att->add_option("--loss-db", att_loss, "Insertion loss in dB")->required();

    IsolatorParams iso_params;
    auto* syn_iso = synth->add_subcommand("isolator", "Isolator with wavelength-dependent isolation");
    syn_iso->add_option("--id", synth_id, "Component id")->required();
    syn_iso->add_option("--forward-loss-db", iso_params.forward_loss_db, "Forward insertion loss (default 1)");
    syn_iso->add_option("--isolation-db", iso_params.isolation_db, "Isolation at band center (default 50)");
    syn_iso->add_option("--rate-db-per-nm", iso_params.rate_db_per_nm,
                        "Isolation decay away from center (default 0.05)");
    syn_iso->add_option("--center-nm", iso_params.band_center_nm, "Band center (default 1550)");

    std::vector<std::string> wdm_pass_specs, wdm_leak_specs;
    double wdm_floor = 40.0;
    auto* syn_wdm = synth->add_subcommand("wdm", "Add/drop filter with passbands and leak windows");
    syn_wdm->add_option("--id", synth_id, "Component id")->required();
    syn_wdm->add_option("--passband", wdm_pass_specs, "Passband as lo:hi:loss_db (repeatable)");
    syn_wdm->add_option("--leak", wdm_leak_specs, "Leak window as lo:hi:leak_db (repeatable)");
    syn_wdm->add_option("--stop-floor-db", wdm_floor, "Rejection outside windows (default 40)");

    BendLossParams bend_params = BendLossParams::radius_12mm();
    bool bend_custom_amplitude = false;
    auto* syn_bend = synth->add_subcommand("bend-filter", "Fiber winding acting as a long-pass loss filter");
    syn_bend->add_option("--id", synth_id, "Component id")->required();
    syn_bend->add_option("--radius-mm", bend_params.radius_mm, "Winding radius (default 12, the shipped calibration)");
    syn_bend->add_option("--length-m", bend_params.length_m, "Wound fiber length (default 1)");
    syn_bend->add_option("--amplitude-db-per-m", bend_params.amplitude_db_per_m, "Curve amplitude")
        ->each([&](const std::string&) { bend_custom_amplitude = true; });
    syn_bend->add_option("--rate-per-nm", bend_params.rate_per_nm, "Exponential rate");
    syn_bend->add_option("--knee-nm", bend_params.knee_nm, "Knee wavelength");
    syn_bend->add_option("--floor-db-per-m", bend_params.floor_db_per_m, "Short-wavelength floor");
    syn_bend->add_option("--cap-db-per-m", bend_params.cap_db_per_m, "Saturation cap");

    std::string scheme_path, components_path;
    auto* compose = app.add_subcommand("compose", "Compute a scheme's double-pass transmittance");
    compose->add_option("--scheme", scheme_path, "Scheme JSON")->required();
    compose->add_option("--components", components_path, "Component set JSON")->required();

    auto* eval = app.add_subcommand("evaluate", "Evaluate leak bounds and find loophole windows");
    eval->add_option("--scheme", scheme_path, "Scheme JSON")->required();
    eval->add_option("--components", components_path, "Component set JSON")->required();

    std::string catalog_path, strategy_name = "auto";
    PlanConstraints constraints;
    auto* plan = app.add_subcommand("plan", "Search for a minimal countermeasure stack");
    plan->add_option("--scheme", scheme_path, "Scheme JSON")->required();
    plan->add_option("--components", components_path, "Component set JSON")->required();
    plan->add_option("--catalog", catalog_path, "Countermeasure catalog JSON")->required();
    plan->add_option("--op-budget-db", constraints.op_loss_budget_db,
                     "Operating-wavelength insertion loss budget (default 6)");
    plan->add_option("--lambda-op", constraints.lambda_op_nm, "Operating wavelength in nm (default 1550)");
    plan->add_option("--strategy", strategy_name, "auto, exhaustive, or greedy (default auto)");

    for (auto* sub : {reduce, compose, eval, plan}) sub->fallthrough();
    synth->fallthrough();
    for (auto* sub : {syn_att, syn_iso, syn_wdm, syn_bend}) sub->fallthrough();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (ref_flag->count() > 0) g.ref_db = ref_db_opt;
        if (reduce->parsed()) return cmd_reduce(raw_path, g);
        if (synth->parsed()) {
            const WavelengthGrid grid = g.grid();
            if (syn_att->parsed())
                return write_synth(synth_attenuator(synth_id, att_loss, grid), g,
                                   cat("{\"name\": \"attenuator\", \"loss_db\": ", format_g10(att_loss), "}"));
            if (syn_iso->parsed())
                return write_synth(
                    synth_isolator(synth_id, iso_params, grid), g,
                    cat("{\"name\": \"isolator\", \"forward_loss_db\": ", format_g10(iso_params.forward_loss_db),
                        ", \"isolation_db\": ", format_g10(iso_params.isolation_db),
                        ", \"rate_db_per_nm\": ", format_g10(iso_params.rate_db_per_nm),
                        ", \"band_center_nm\": ", format_g10(iso_params.band_center_nm), "}"));
            if (syn_wdm->parsed()) {
                WdmParams p;
                p.stop_floor_db = wdm_floor;
                auto parse_window = [](const std::string& spec) {
                    SpectralWindow w;
                    const auto c1 = spec.find(':');
                    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
                    if (c1 == std::string::npos || c2 == std::string::npos)
                        throw Error(cat("window must be lo:hi:db (got '", spec, "')"));
                    w.lo_nm = std::stod(spec.substr(0, c1));
                    w.hi_nm = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
                    w.level_db = std::stod(spec.substr(c2 + 1));
                    return w;
                };
                for (const auto& s : wdm_pass_specs) p.passbands.push_back(parse_window(s));
                for (const auto& s : wdm_leak_specs) p.leak_windows.push_back(parse_window(s));
                return write_synth(synth_wdm(synth_id, p, grid), g,
                                   cat("{\"name\": \"wdm\", \"stop_floor_db\": ", format_g10(wdm_floor), "}"));
            }
            if (syn_bend->parsed()) {
                if (bend_params.radius_mm != 12.0 && !bend_custom_amplitude)
                    throw Error(cat("bend radius ", bend_params.radius_mm,
                                    " mm has no shipped calibration; supply the curve parameters"));
                return write_synth(
                    synth_bend_filter(synth_id, bend_params, grid), g,
                    cat("{\"name\": \"bend_filter\", \"radius_mm\": ", format_g10(bend_params.radius_mm),
                        ", \"length_m\": ", format_g10(bend_params.length_m), "}"));
            }
        }
        if (compose->parsed()) return cmd_compose(scheme_path, components_path, g);
        if (eval->parsed()) return cmd_evaluate(scheme_path, components_path, g);
        if (plan->parsed())
            return cmd_plan(scheme_path, components_path, catalog_path, constraints, strategy_name, g);
        std::fprintf(stderr, "error: no command given (try --help)\n");
        return kExitError;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
}

}  // namespace thra
