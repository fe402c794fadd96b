#pragma once

// Acceptance suite shared by the vg_acceptance test binary and `vgtool selftest`.

#include <string>
#include <vector>

namespace vg::selftest {

struct CriterionResult {
    int id;
    std::string title;
    bool pass;
    std::string detail;
    double seconds;
};

// Criteria are numbered 1..11. An empty `only` runs all of them.
std::vector<CriterionResult> run(const std::vector<int>& only = {});

// "PASS [n] title: detail (t s)" or the FAIL equivalent.
std::string format_line(const CriterionResult& r);

}  // namespace vg::selftest
