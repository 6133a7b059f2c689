#include "thra/planner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <utility>

#include "json.hpp"
#include "thra/util.hpp"

namespace thra {

namespace fs = std::filesystem;
using nlohmann::json;

void CountermeasureCatalog::validate() const {
    std::set<std::string> seen;
    for (const auto& e : entries) {
        if (e.component.id.empty()) throw Error("countermeasure component id must not be empty");
        if (!seen.insert(e.component.id).second)
            throw Error(cat("duplicate countermeasure id '", e.component.id, "'"));
        if (e.component.kind != ComponentKind::kTwoPort)
            throw Error(cat("countermeasure '", e.component.id, "' must be a two-port component"));
        if (e.max_count < 0)
            throw Error(cat("countermeasure '", e.component.id, "' max_count must be >= 0"));
        if (!std::isfinite(e.operating_loss_db) || e.operating_loss_db < 0.0)
            throw Error(cat("countermeasure '", e.component.id, "' operating loss must be >= 0 dB"));
    }
}

void PlanConstraints::validate() const {
    if (!std::isfinite(chi_max) || chi_max <= 0.0 || chi_max >= 1.0)
        throw Error(cat("chi_max must lie in (0, 1) (got ", chi_max, ")"));
    if (!std::isfinite(lambda_op_nm) || lambda_op_nm <= 0.0)
        throw Error("operating wavelength must be positive");
    if (!std::isfinite(op_loss_budget_db) || op_loss_budget_db < 0.0)
        throw Error(cat("operating loss budget must be >= 0 dB (got ", op_loss_budget_db, ")"));
}

int Plan::total_count() const {
    int total = 0;
    for (const auto& [id, n] : picks) total += n;
    return total;
}

namespace {

const CountermeasureEntry& entry_by_id(const CountermeasureCatalog& catalog, const std::string& id) {
    for (const auto& e : catalog.entries)
        if (e.component.id == id) return e;
    throw Error(cat("unknown countermeasure id '", id, "'"));
}

Scheme scheme_with_plan(const Plan& plan, const Scheme& scheme, const CountermeasureCatalog& catalog) {
    Scheme current = scheme;
    for (const auto& [id, count] : plan.picks) {
        const auto& entry = entry_by_id(catalog, id);
        if (count < 0) throw Error(cat("plan pick '", id, "' has a negative count"));
        if (count > entry.max_count)
            throw Error(cat("plan uses ", count, " of '", id, "' but only ", entry.max_count,
                            " are available"));
        for (int k = 0; k < count; ++k) current = apply_countermeasure(current, entry.component, 0);
    }
    return current;
}

double plan_operating_loss(const Plan& plan, const CountermeasureCatalog& catalog) {
    double loss = 0.0;
    for (const auto& [id, count] : plan.picks)
        loss += entry_by_id(catalog, id).operating_loss_db * count;
    return loss;
}

}  // namespace

PlanReport verify_plan(const Plan& plan, const Scheme& scheme, const CountermeasureCatalog& catalog,
                       const ProbeBudget& budget, const PlanConstraints& constraints,
                       const WavelengthGrid& grid) {
    catalog.validate();
    constraints.validate();
    budget.validate();

    const Scheme hardened = scheme_with_plan(plan, scheme, catalog);
    const TransmittanceSpectrum composite = composite_transmittance(hardened, grid);
    const SecurityThresholds thresholds{constraints.chi_max, -140.0};
    const InfoBoundCurve curve = evaluate(composite, budget, thresholds);

    PlanReport report;
    report.worst_chi = curve.chi[curve.worst_index];
    report.worst_lambda_nm = curve.grid[curve.worst_index];
    report.worst_t_db = curve.t_db[curve.worst_index];
    report.loopholes = curve.loopholes;
    report.operating_loss_db = plan_operating_loss(plan, catalog);
    report.chi_pass = !curve.has_loopholes();
    report.loss_pass = report.operating_loss_db <= constraints.op_loss_budget_db;
    report.pass = report.chi_pass && report.loss_pass;
    return report;
}

namespace {

struct Candidate {
    Plan plan;
    double op_loss = 0.0;
};

bool candidate_order(const Candidate& a, const Candidate& b) {
    const int ta = a.plan.total_count();
    const int tb = b.plan.total_count();
    if (ta != tb) return ta < tb;
    if (a.op_loss != b.op_loss) return a.op_loss < b.op_loss;
    return a.plan.picks < b.plan.picks;
}

SearchResult search_exhaustive(const CountermeasureCatalog& catalog, const Scheme& scheme,
                               const ProbeBudget& budget, const PlanConstraints& constraints,
                               const WavelengthGrid& grid) {
    std::vector<Candidate> candidates;
    std::vector<int> counts(catalog.entries.size(), 0);
    while (true) {
        Candidate c;
        for (std::size_t i = 0; i < counts.size(); ++i)
            if (counts[i] > 0) c.plan.picks[catalog.entries[i].component.id] = counts[i];
        c.op_loss = plan_operating_loss(c.plan, catalog);
        if (c.op_loss <= constraints.op_loss_budget_db) candidates.push_back(std::move(c));
        std::size_t i = 0;
        for (; i < counts.size(); ++i) {
            if (counts[i] < catalog.entries[i].max_count) {
                ++counts[i];
                break;
            }
            counts[i] = 0;
        }
        if (i == counts.size()) break;
    }
    std::sort(candidates.begin(), candidates.end(), candidate_order);

    SearchResult result;
    result.strategy = "exhaustive";
    double best_chi = std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (const auto& c : candidates) {
        const PlanReport report = verify_plan(c.plan, scheme, catalog, budget, constraints, grid);
        if (report.pass) {
            result.feasible = true;
            result.plan = c.plan;
            result.report = report;
            return result;
        }
        if (!have_best || report.worst_chi < best_chi) {
            have_best = true;
            best_chi = report.worst_chi;
            result.plan = c.plan;
            result.report = report;
        }
    }
    return result;
}

SearchResult search_greedy(const CountermeasureCatalog& catalog, const Scheme& scheme,
                           const ProbeBudget& budget, const PlanConstraints& constraints,
                           const WavelengthGrid& grid) {
    SearchResult result;
    result.strategy = "greedy";

    Plan plan;
    PlanReport report = verify_plan(plan, scheme, catalog, budget, constraints, grid);
    while (!report.pass) {
        // Score each affordable addition by the worst-case photon number it
        // leaves behind; chi is monotone in mu, so this avoids ties where
        // chi saturates at 1 across the whole band.
        const double loss_now = plan_operating_loss(plan, catalog);
        bool found = false;
        std::string best_id;
        double best_mu = std::numeric_limits<double>::infinity();
        double best_loss = 0.0;
        for (const auto& e : catalog.entries) {
            const int used = plan.picks.count(e.component.id) ? plan.picks.at(e.component.id) : 0;
            if (used >= e.max_count) continue;
            if (loss_now + e.operating_loss_db > constraints.op_loss_budget_db) continue;
            Plan trial = plan;
            trial.picks[e.component.id] = used + 1;
            const Scheme hardened = scheme_with_plan(trial, scheme, catalog);
            const InfoBoundCurve curve =
                evaluate(composite_transmittance(hardened, grid), budget,
                         SecurityThresholds{constraints.chi_max, -140.0});
            const double worst_mu = curve.mu_p[curve.worst_index];
            if (!found || worst_mu < best_mu ||
                (worst_mu == best_mu && (e.operating_loss_db < best_loss ||
                                         (e.operating_loss_db == best_loss && e.component.id < best_id)))) {
                found = true;
                best_id = e.component.id;
                best_mu = worst_mu;
                best_loss = e.operating_loss_db;
            }
        }
        if (!found) break;  // nothing affordable left to add
        plan.picks[best_id] += 1;
        report = verify_plan(plan, scheme, catalog, budget, constraints, grid);
    }

    result.feasible = report.pass;
    result.plan = plan;
    result.report = report;
    return result;
}

}  // namespace

SearchResult search_min_stack(const CountermeasureCatalog& catalog, const Scheme& scheme,
                              const ProbeBudget& budget, const PlanConstraints& constraints,
                              const WavelengthGrid& grid, PlanStrategy strategy) {
    catalog.validate();
    constraints.validate();
    budget.validate();

    if (strategy == PlanStrategy::kAuto) {
        double combos = 1.0;
        for (const auto& e : catalog.entries) combos *= static_cast<double>(e.max_count) + 1.0;
        strategy = combos <= 1e4 ? PlanStrategy::kExhaustive : PlanStrategy::kGreedy;
    }
    return strategy == PlanStrategy::kExhaustive
               ? search_exhaustive(catalog, scheme, budget, constraints, grid)
               : search_greedy(catalog, scheme, budget, constraints, grid);
}

CountermeasureCatalog load_countermeasure_catalog(const std::string& path,
                                                  const WavelengthGrid& synth_grid,
                                                  double lambda_op_nm) {
    std::ifstream in(path);
    if (!in) throw Error(cat("cannot open '", path, "'"));
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw Error(cat(path, ": invalid JSON: ", e.what()));
    }
    if (!j.is_object() || !j.contains("entries") || !j.at("entries").is_array())
        throw Error(cat(path, ": catalog must be an object with an 'entries' array"));

    const std::string base_dir = fs::path(path).parent_path().string();
    CountermeasureCatalog catalog;
    for (const auto& entry : j.at("entries")) {
        if (!entry.is_object() || !entry.contains("component"))
            throw Error(cat(path, ": each catalog entry needs a 'component'"));
        CountermeasureEntry e;
        if (entry.at("component").is_string()) {
            fs::path rel(entry.at("component").get<std::string>());
            const std::string resolved =
                rel.is_absolute() ? rel.string() : (fs::path(base_dir) / rel).string();
            e.component = load_component_manifest(resolved, synth_grid);
        } else {
            e.component = parse_component_manifest(entry.at("component").dump(), base_dir,
                                                   synth_grid, cat(path, " (inline component)"));
        }
        if (entry.contains("max_count")) {
            if (!entry.at("max_count").is_number_integer())
                throw Error(cat(path, ": 'max_count' must be an integer"));
            e.max_count = entry.at("max_count").get<int>();
        }
        if (entry.contains("operating_loss_db")) {
            e.operating_loss_db = entry.at("operating_loss_db").get<double>();
        } else {
            const WavelengthGrid op_grid({lambda_op_nm});
            try {
                const auto at_op = resample(e.component.leg(Leg::forward()), op_grid);
                e.operating_loss_db = std::max(0.0, -at_op.values_db[0]);
            } catch (const Error& err) {
                throw Error(cat(path, ": cannot derive operating loss for '", e.component.id,
                                "': ", err.what()));
            }
        }
        catalog.entries.push_back(std::move(e));
    }
    catalog.validate();
    return catalog;
}

std::string plan_json(const std::string& scheme_name, const SearchResult& result,
                      const PlanConstraints& constraints) {
    nlohmann::ordered_json j;
    j["scheme"] = scheme_name;
    j["feasible"] = result.feasible;
    j["strategy"] = result.strategy;
    j["constraints"] = {
        {"chi_max", constraints.chi_max},
        {"lambda_op_nm", constraints.lambda_op_nm},
        {"op_loss_budget_db", constraints.op_loss_budget_db},
    };
    nlohmann::ordered_json picks = nlohmann::ordered_json::object();
    for (const auto& [id, count] : result.plan.picks) picks[id] = count;
    j["plan"] = {
        {"picks", picks},
        {"total_count", result.plan.total_count()},
        {"operating_loss_db", round_g6(result.report.operating_loss_db)},
    };
    nlohmann::ordered_json loopholes = nlohmann::ordered_json::array();
    for (const auto& l : result.report.loopholes)
        loopholes.push_back({{"lo_nm", l.lo_nm}, {"hi_nm", l.hi_nm}});
    j["verification"] = {
        {"pass", result.report.pass},
        {"chi_pass", result.report.chi_pass},
        {"loss_pass", result.report.loss_pass},
        {"worst_chi", round_g6(result.report.worst_chi)},
        {"worst_lambda_nm", result.report.worst_lambda_nm},
        {"worst_t_db", round_g6(result.report.worst_t_db)},
        {"loopholes", loopholes},
    };
    return j.dump(2) + "\n";
}

}  // namespace thra
