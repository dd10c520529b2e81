#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sdelab {

struct CheckRow {
    std::string criterion;
    std::string target;
    std::string measured;
    std::string tolerance;
    bool pass = false;
};

struct CriterionResult {
    std::string id;
    std::vector<CheckRow> rows;
    double seconds = 0.0;

    bool pass() const;
};

struct AcceptanceOptions {
    std::uint64_t master_seed = 20240817;
    std::string filter; // run only the criterion with this id when nonempty
    bool parallel = true;
};

// Runs the full desk-scale verification battery. Every tolerance is fixed
// here, in code; a seed override changes measured values only.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

// One line per check: criterion, target, measured, tolerance, pass/fail.
void print_acceptance(std::ostream& os, const std::vector<CriterionResult>& results);

bool all_pass(const std::vector<CriterionResult>& results);

} // namespace sdelab
