#pragma once

#include <string>
#include <vector>

#include "sbp/verification.hpp"

namespace sbp {

// Named self-check suites behind the `verify` CLI command.  Each suite is a
// list of seedable checks; run them with run_suite.  Unit tests pin frozen
// reference values separately; these suites rely on internal consistency
// (independent methods agreeing, known identities, calibrated statistics) so
// they can run against any seed.
std::vector<std::string> suite_names();

std::vector<SuiteTest> make_suite(const std::string& name);

}  // namespace sbp
