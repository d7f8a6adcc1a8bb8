#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace khinchin;
using cli::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "khinchin");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        cells.push_back(cur);
        rows.push_back(cells);
    }
    return rows;
}

bool same_15_digits(double a, double b) {
    if (a == b) return true;
    return std::fabs(a - b) <= 5e-15 * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace

TEST_CASE("criteria on exp reports gaussian evidence", "[cli]") {
    auto r = run({"criteria", "--model", "exp", "--kmax", "6", "--format", "json"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["verdict"] == "gaussian-evidence");
    CHECK(j["schema_version"] == 1);
    CHECK(j["command"] == "criteria");
    CHECK(j["rows"].size() == 4 * 15);
    CHECK(j["trends"]["3"] == "vanishing");
    CHECK(j["bounded_moments"]["6"] == true);
}

TEST_CASE("moments of the symmetric Bernoulli law", "[cli]") {
    auto r = run({"moments", "--model", "poly:1,1", "--t", "1", "--order", "4"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    const auto& row = j["rows"][0];
    CHECK(row["mean"] == 0.5);
    CHECK(row["variance"] == 0.25);
    CHECK(row["nu_3"] == 0.0);
    CHECK(row["nu_4"] == 1.0);
}

TEST_CASE("asymptotics for MacMahon approach the constant", "[cli]") {
    auto r = run({"asymptotics", "--model", "macmahon", "--m", "0", "--s", "0.01", "--format", "json"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    REQUIRE(j["rows"].size() == 1);
    CHECK(std::fabs(j["rows"][0]["constant"].get<double>() - 1.2020569) < 1e-7);
    CHECK(std::fabs(j["rows"][0]["ratio"].get<double>() - 1) < 1e-3);
}

TEST_CASE("JSON reports re-serialize byte-identically", "[cli]") {
    const std::vector<std::vector<std::string>> runs{
        {"family", "--model", "geometric", "--t", "0.5"},
        {"moments", "--model", "partitions:p=1", "--t", "0.3,0.6", "--order", "6"},
        {"cumulants", "--model", "macmahon", "--t", "0.4", "--kmax", "5"},
        {"criteria", "--model", "geometric"},
        {"asymptotics", "--model", "partitions:p=1", "--m", "0,1"},
        {"ks", "--model", "exp", "--t", "1,10,100"},
        {"zerofree", "--model", "poly:1,1", "--t", "1"},
        {"euler", "--m", "1", "--p", "2", "--k", "3", "--s", "1,0.1"}};
    for (const auto& args : runs) {
        INFO(args[0]);
        auto r = run(args);
        REQUIRE(r.code == 0);
        auto j = json::parse(r.out);
        CHECK(j["schema_version"] == 1);
        CHECK(j.dump(2) + "\n" == r.out);
        CHECK(json::parse(j.dump(2)).dump(2) == j.dump(2));
    }
}

TEST_CASE("CSV and JSON carry the same numbers", "[cli]") {
    const std::vector<std::vector<std::string>> runs{
        {"moments", "--model", "partitions:p=1", "--t", "0.3,0.6", "--order", "6"},
        {"cumulants", "--model", "density:a=1,d=3", "--t", "0.5,0.7", "--kmax", "6"},
        {"ks", "--model", "exp", "--t", "1,10,100"},
        {"criteria", "--model", "exp", "--kmax", "4"},
        {"euler", "--m", "0,2", "--s", "1,0.5"}};
    for (auto args : runs) {
        INFO(args[0]);
        auto j = json::parse(run(args).out);
        args.push_back("--format");
        args.push_back("csv");
        auto c = run(args);
        REQUIRE(c.code == 0);
        auto rows = parse_csv(c.out);
        REQUIRE(rows.size() == j["rows"].size() + 1);
        const auto& header = rows[0];
        CHECK(header == j["columns"].get<std::vector<std::string>>());
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& jr = j["rows"][i - 1];
            for (std::size_t c2 = 0; c2 < header.size(); ++c2) {
                const auto& v = jr[header[c2]];
                if (v.is_number()) {
                    CHECK(same_15_digits(std::stod(rows[i][c2]), v.get<double>()));
                } else if (v.is_boolean()) {
                    CHECK(rows[i][c2] == (v.get<bool>() ? "true" : "false"));
                } else {
                    CHECK(rows[i][c2] == v.get<std::string>());
                }
            }
        }
    }
}

TEST_CASE("output ordering does not depend on --jobs", "[cli]") {
    auto a = run({"ks", "--model", "partitions:p=1", "--t", "0.3,0.5,0.7,0.8"});
    auto b = run({"ks", "--model", "partitions:p=1", "--t", "0.3,0.5,0.7,0.8", "--jobs", "3"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("validation errors exit with 2 and a machine-readable code", "[cli]") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"moments", "--model", "nosuch", "--t", "1"},
             {"moments", "--model", "geometric", "--t", "1.5"},
             {"moments", "--model", "exp", "--t", "1", "--order", "11"},
             {"moments", "--model", "exp", "--t", "1", "--format", "xml"},
             {"moments", "--model", "exp", "--t", "1", "--t-grid", "1,2"},
             {"criteria", "--model", "exp", "--t-grid", "1,2,3"},
             {"frobnicate"},
             {"moments", "--t", "1"},
             {"moments", "--model", "exp", "--t", "1", "--bogus", "3"}}) {
        INFO(args[0] << " " << (args.size() > 2 ? args[2] : ""));
        auto r = run(args);
        CHECK(r.code == 2);
        CHECK(r.out.empty());
        auto e = json::parse(r.err);
        CHECK(e["schema_version"] == 1);
        CHECK(e.contains("error_code"));
        CHECK(e.contains("message"));
    }
}

TEST_CASE("budget failures exit with 3", "[cli]") {
    auto r = run({"moments", "--model", "geometric", "--t", "0.9999999999"});
    CHECK(r.code == 3);
    auto e = json::parse(r.err);
    CHECK(e["error_code"] == "budget_exceeded");
}

TEST_CASE("help goes to stdout", "[cli]") {
    auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("criteria") != std::string::npos);
}

TEST_CASE("shortest round-trip number formatting", "[cli]") {
    CHECK(cli::format_double(0.1) == "0.1");
    CHECK(cli::format_double(0.25) == "0.25");
    CHECK(cli::format_double(1e-300) == "1e-300");
    CHECK(std::stod(cli::format_double(M_PI)) == M_PI);
    CHECK(cli::format_double(std::nan("")) == "nan");
}
