// Acceptance suite: runs every verification criterion at its pinned
// tolerance and prints one pass/fail line per criterion.  Exit code is
// nonzero if any criterion fails.

#include <cstdio>
#include <iostream>

#include "w1/suite.hpp"

int main() {
  const auto res = w1::suite::run_suite();
  for (const auto& c : res.criteria)
    std::printf("[%s] criterion %d: %s -- %s (%.2fs)\n", c.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), c.detail.c_str(), c.seconds);
  std::printf("%s: %zu criteria\n", res.all_pass() ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              res.criteria.size());
  return res.all_pass() ? 0 : 1;
}
