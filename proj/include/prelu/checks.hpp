#pragma once

#include <functional>
#include <string>
#include <vector>

#include "prelu/types.hpp"

namespace prelu {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::string detail;
    double seconds = 0.0;
};

/// The verification gates, one function per criterion. Each runs at the
/// pinned sizes and tolerances and reports pass/fail plus a short detail
/// string with the measured quantities.
CheckResult check_realizability();          // 1
CheckResult check_attack_oracle();          // 2
CheckResult check_critical_radius();        // 3
CheckResult check_conjecture_desk();        // 4
CheckResult check_alignment_signs();        // 5
CheckResult check_gp_convexity();           // 6
CheckResult check_balancedness();           // 7
CheckResult check_gradient_correctness();   // 8
/// 9: runs only when the MNIST IDX files are present under data_dir;
/// otherwise returns a skipped result naming the expected paths.
CheckResult check_mnist_parity(const std::string& data_dir);

/// Checks 1-8 in order.
std::vector<CheckResult> theory_suite_checks();

/// Formats "[PASS]/[FAIL] C<i> <name> (<detail>) [<t>s]".
std::string format_check(const CheckResult& r);

} // namespace prelu
