// Copyright (c) diffcost contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffcost/bench.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace diffcost {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SemanticError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string join_path(const std::string& dir, const std::string& rel) {
    if (rel.empty() || rel.front() == '/')
        return rel;
    if (dir.empty())
        return rel;
    return dir.back() == '/' ? dir + rel : dir + "/" + rel;
}

} // namespace

std::vector<BenchEntry> load_suite(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    std::vector<BenchEntry> out;
    for (auto& e : j.at("benchmarks")) {
        BenchEntry b;
        b.name = e.at("name").get<std::string>();
        b.new_path = e.at("new").get<std::string>();
        b.old_path = e.at("old").get<std::string>();
        b.degree = e.value("d", 2);
        b.prodk = e.value("k", -1);
        b.invariants_path = e.value("invariants", std::string());
        if (e.contains("tight") && !e.at("tight").is_null())
            b.tight = e.at("tight").get<long>();
        b.expect = e.value("expect", std::string("exact"));
        if (e.contains("box"))
            for (auto& [var, range] : e.at("box").items())
                b.box[var] = {range.at(0).get<std::int64_t>(), range.at(1).get<std::int64_t>()};
        b.oracle = e.value("oracle", true);
        b.note = e.value("note", std::string());
        out.push_back(std::move(b));
    }
    return out;
}

namespace {

BenchResult run_one(const BenchEntry& e, const AnalysisOptions& base,
                    const std::string& suite_dir) {
    auto t0 = std::chrono::steady_clock::now();
    BenchResult r;
    r.name = e.name;
    r.tight = e.tight;
    r.expect = e.expect;
    r.note = e.note;

    AnalysisOptions opt = base;
    opt.degree = e.degree;
    opt.prodk = e.prodk;

    try {
        std::string inv_text;
        if (!e.invariants_path.empty())
            inv_text = read_file(join_path(suite_dir, e.invariants_path));
        PreparedSystem sys_new = prepare(join_path(suite_dir, e.new_path), inv_text, "new", opt);
        PreparedSystem sys_old = prepare(join_path(suite_dir, e.old_path), inv_text, "old", opt);

        AnalysisReport rep = cmd_diff(sys_new, sys_old, opt);
        r.status = rep.status;
        if (rep.status == "threshold") {
            r.raw = rep.threshold_raw;
            r.floored = rep.threshold_int;
            if (e.oracle && rep.witness) {
                RunBudget budget = derive_budget(sys_new.ts, 4);
                for (auto& [v, range] : e.box)
                    budget.input_box[v] = range;
                WitnessCheck wc =
                    check_witness(*rep.witness, sys_new.ts, sys_old.ts, budget);
                r.sound_verified = wc.pass;
                if (!wc.pass)
                    r.note += std::string(r.note.empty() ? "" : "; ") + wc.failures.front();
            }
        }

        // expectation discipline
        if (e.expect == "exact") {
            r.match = rep.status == "threshold" && e.tight && r.floored &&
                      *r.floored == mpz_class(*e.tight) &&
                      *r.raw <= Rational(*e.tight) + Rational(1);
            if (r.match && e.oracle && !r.sound_verified)
                r.match = false;
        } else if (e.expect == "loose-ok") {
            r.match = rep.status == "unknown" ||
                      (rep.status == "threshold" &&
                       (!e.tight || *r.raw >= Rational(*e.tight)));
            if (rep.status == "threshold" && e.oracle && !r.sound_verified)
                r.match = false;
        } else { // unknown-ok
            r.match = true;
            if (rep.status == "threshold" && e.tight && *r.raw < Rational(*e.tight))
                r.match = false; // computed threshold below the true maximum: unsound
        }
    } catch (const std::exception& ex) {
        r.status = std::string("error: ") + ex.what();
        r.match = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace

std::vector<BenchResult> run_suite(const std::vector<BenchEntry>& entries,
                                   const AnalysisOptions& base, const std::string& suite_dir,
                                   int workers) {
    std::vector<BenchResult> results(entries.size());
    if (workers < 1)
        workers = 1;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= entries.size())
                return;
            results[i] = run_one(entries[i], base, suite_dir);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back(work);
    for (auto& th : pool)
        th.join();
    return results;
}

std::string render_table(const std::vector<BenchResult>& results) {
    std::ostringstream os;
    os << "benchmark            computed        floor   tight   expect      match  sound  time\n";
    for (auto& r : results) {
        char line[256];
        std::string computed = r.raw ? r.raw->str() : r.status;
        std::string floored = r.floored ? r.floored->get_str() : "-";
        std::string tight = r.tight ? std::to_string(*r.tight) : "-";
        std::snprintf(line, sizeof line, "%-20s %-15s %-7s %-7s %-11s %-6s %-6s %.2fs\n",
                      r.name.c_str(), computed.c_str(), floored.c_str(), tight.c_str(),
                      r.expect.c_str(), r.match ? "yes" : "NO",
                      r.sound_verified ? "yes" : "-", r.seconds);
        os << line;
        if (!r.note.empty())
            os << "    note: " << r.note << "\n";
    }
    return os.str();
}

bool all_expectations_met(const std::vector<BenchResult>& results) {
    for (auto& r : results)
        if (!r.match)
            return false;
    return true;
}

} // namespace diffcost
