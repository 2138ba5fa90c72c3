#pragma once

// The desk-scale acceptance suite: twelve named checks, each runnable on its
// own, shared by `isokz verify` and the acceptance test binary.

#include <cstdint>
#include <string>
#include <vector>

#include "isokz/json_io.hpp"

namespace isokz::verify {

constexpr int kCriteria = 12;
constexpr std::uint64_t kDefaultSeed = 20261016;

struct SuiteOptions {
    std::uint64_t seed = kDefaultSeed;
    int jobs = 1;
    std::vector<int> criteria;  // empty: all
    int digits = io::kDefaultDigits;
};

struct CheckResult {
    int criterion = 0;
    std::string name;
    bool passed = false;
    std::string summary;
    io::json details;
};

std::string criterion_name(int k);
CheckResult run_criterion(int k, const SuiteOptions& opt);
// Independent checks run on up to `jobs` threads; results keep criterion order.
std::vector<CheckResult> run_suite(const SuiteOptions& opt);
io::json suite_report(const std::vector<CheckResult>& results, const SuiteOptions& opt);
// "criterion 3 triangularity: PASS (...)"
std::string result_line(const CheckResult& r);
// Convention flags logged in every report.
io::json conventions();

} // namespace isokz::verify
