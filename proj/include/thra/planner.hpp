#pragma once

#include <map>
#include <string>
#include <vector>

#include "thra/scheme.hpp"
#include "thra/security.hpp"

namespace thra {

// One countermeasure type available to the planner, with how many units may
// be stacked and the per-unit insertion loss at the operating wavelength.
struct CountermeasureEntry {
    Component component;      // two-port
    int max_count = 1;
    double operating_loss_db = 0.0;  // positive magnitude
};

struct CountermeasureCatalog {
    std::vector<CountermeasureEntry> entries;
    void validate() const;  // two-port components, unique ids, sane counts
};

struct PlanConstraints {
    double chi_max = 1e-2;
    double lambda_op_nm = 1550.0;       // operating wavelength for insertion loss
    double op_loss_budget_db = 6.0;     // total added single-pass loss allowed
    void validate() const;
};

// Countermeasure multiset, keyed by component id.
struct Plan {
    std::map<std::string, int> picks;
    int total_count() const;
};

struct PlanReport {
    bool pass = false;
    bool chi_pass = false;
    bool loss_pass = false;
    double worst_chi = 0.0;
    double worst_lambda_nm = 0.0;
    double worst_t_db = 0.0;
    double operating_loss_db = 0.0;  // added by the plan, single pass
    std::vector<LoopholeInterval> loopholes;
};

// Splices every picked countermeasure into the scheme (channel side),
// evaluates the double-pass leak bound over the grid, and checks the added
// operating loss against the budget.
PlanReport verify_plan(const Plan& plan, const Scheme& scheme, const CountermeasureCatalog& catalog,
                       const ProbeBudget& budget, const PlanConstraints& constraints,
                       const WavelengthGrid& grid);

enum class PlanStrategy { kAuto, kExhaustive, kGreedy };

struct SearchResult {
    bool feasible = false;
    Plan plan;                 // best found (empty when nothing helps)
    PlanReport report;         // verification of `plan`
    std::string strategy;      // "exhaustive" or "greedy"
};

// Finds a feasible plan minimizing (total count, operating loss, ids).
// Small catalogs are enumerated exhaustively; larger ones fall back to a
// greedy heuristic that grows the stack by the pick that most reduces the
// worst-case photon number. Infeasible searches return the best attempt.
SearchResult search_min_stack(const CountermeasureCatalog& catalog, const Scheme& scheme,
                              const ProbeBudget& budget, const PlanConstraints& constraints,
                              const WavelengthGrid& grid,
                              PlanStrategy strategy = PlanStrategy::kAuto);

// JSON loaders/writers for catalogs and plan reports.
CountermeasureCatalog load_countermeasure_catalog(const std::string& path,
                                                  const WavelengthGrid& synth_grid,
                                                  double lambda_op_nm);
std::string plan_json(const std::string& scheme_name, const SearchResult& result,
                      const PlanConstraints& constraints);

}  // namespace thra
