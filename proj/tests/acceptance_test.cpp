// Acceptance suite: one line per criterion, then the per-check details.
#include <gtest/gtest.h>

#include <iostream>

#include "indexforge/testing/acceptance.hpp"

namespace acc = indexforge::acceptance;

namespace {

std::vector<acc::CriterionResult>& results() {
  static std::vector<acc::CriterionResult> r;
  return r;
}

class Criterion : public ::testing::TestWithParam<int> {};

TEST_P(Criterion, Passes) {
  const auto r = acc::criteria()[GetParam()](acc::Options{});
  results().push_back(r);
  std::cout << acc::summary_line(r) << '\n';
  for (const auto& c : r.checks) std::cout << acc::check_line(c) << '\n';
  EXPECT_TRUE(r.error.empty()) << r.error;
  for (const auto& c : r.checks) EXPECT_TRUE(c.ok) << acc::check_line(c);
  EXPECT_TRUE(r.within_time()) << r.runtime_ms << " ms";
}

INSTANTIATE_TEST_SUITE_P(All, Criterion, ::testing::Range(0, 11),
                         [](const auto& info) { return "criterion_" + std::to_string(info.param + 1); });

class Summary : public ::testing::Environment {
 public:
  void TearDown() override {
    std::cout << "\nAcceptance summary\n";
    for (const auto& r : results()) std::cout << acc::summary_line(r) << '\n';
  }
};

const auto* const kSummary = ::testing::AddGlobalTestEnvironment(new Summary);

}  // namespace
