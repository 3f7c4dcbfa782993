// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "diffcost/analysis.hpp"
#include "diffcost/witness_check.hpp"

#include <optional>
#include <string>
#include <vector>

namespace diffcost {

/// One regression pair plus its expectation metadata: the tight value (the
/// true maximal difference, recorded with the suite), the match discipline,
/// required user invariants, and the box for oracle replay.
struct BenchEntry {
    std::string name;
    std::string new_path;
    std::string old_path;
    int degree = 2;
    int prodk = -1;
    std::string invariants_path; // empty = none
    std::optional<long> tight;
    std::string expect = "exact"; // exact | loose-ok | unknown-ok
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> box;
    bool oracle = true;
    std::string note;
};

struct BenchResult {
    std::string name;
    std::string status;
    std::optional<Rational> raw;
    std::optional<mpz_class> floored;
    std::optional<long> tight;
    std::string expect;
    bool match = false;
    bool sound_verified = false;
    double seconds = 0;
    std::string note;
};

std::vector<BenchEntry> load_suite(const std::string& path);

/// Runs every entry (worker pool), checks expectations and replays witnesses
/// through the oracle on each entry's box. Results come back in suite order.
std::vector<BenchResult> run_suite(const std::vector<BenchEntry>& entries,
                                   const AnalysisOptions& base, const std::string& suite_dir,
                                   int workers);

std::string render_table(const std::vector<BenchResult>& results);

bool all_expectations_met(const std::vector<BenchResult>& results);

} // namespace diffcost
