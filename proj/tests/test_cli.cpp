#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fmci/ci.hpp"
#include "fmci/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using fmci::cli::run;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(const std::vector<std::string>& args, const std::string& stdin_text = "") {
    std::istringstream in(stdin_text);
    std::ostringstream out, err;
    const int code = run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

const fs::path fixtures{FMCI_FIXTURE_DIR};

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("fmci-cli-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string lines(std::size_t from, std::size_t to) {
    std::string s;
    for (std::size_t i = from; i < to; ++i) s += "tok-" + std::to_string(i) + "\n";
    return s;
}

}  // namespace

TEST_CASE("build") {
    TempDir dir;
    SUBCASE("duplicate lines build the same file as one line") {
        REQUIRE(call({"build", "--out", dir / "one.fmci"}, "apple\n").code == 0);
        REQUIRE(call({"build", "--out", dir / "two.fmci"}, "apple\napple\n").code == 0);
        CHECK(slurp(dir / "one.fmci") == slurp(dir / "two.fmci"));
    }
    SUBCASE("empty input gives a fresh sketch") {
        const auto r = call({"build", "--r0", "1", "--c0", "2", "--z0", "3", "--out", dir / "e.fmci"});
        REQUIRE(r.code == 0);
        CHECK(r.err.find("tokens: 0") != std::string::npos);
        const auto bytes = slurp(dir / "e.fmci");
        REQUIRE(bytes.size() == 20 + 4 * 4);
        for (std::size_t i = 20; i < bytes.size(); i += 4) {
            CHECK(bytes[i] == 0);
            CHECK(bytes[i + 2] == 7);
        }
    }
    SUBCASE("golden corpus from a file and from stdin") {
        REQUIRE(call({"build", "--r0", "2", "--c0", "3", "--z0", "4", "--out", dir / "g.fmci",
                      (fixtures / "golden10.txt").string()})
                    .code == 0);
        CHECK(slurp(dir / "g.fmci") == slurp(fixtures / "golden10.fmci"));
        const auto r = call({"build", "--r0", "2", "--c0", "3", "--z0", "4", "--out",
                             dir / "s.fmci", "-"},
                            slurp(fixtures / "golden10.txt"));
        REQUIRE(r.code == 0);
        CHECK(r.err.find("tokens: 10") != std::string::npos);
        CHECK(slurp(dir / "s.fmci") == slurp(fixtures / "golden10.fmci"));
    }
    SUBCASE("a final line without newline is still a token") {
        REQUIRE(call({"build", "--out", dir / "a.fmci"}, "x\ny\n").code == 0);
        REQUIRE(call({"build", "--out", dir / "b.fmci"}, "x\ny").code == 0);
        CHECK(slurp(dir / "a.fmci") == slurp(dir / "b.fmci"));
    }
    SUBCASE("errors") {
        CHECK(call({"build", "--out", dir / "x.fmci", dir / "missing.txt"}).code == 2);
        CHECK(call({"build", "--out", dir / "no/such/dir/x.fmci"}, "a\n").code == 2);
        CHECK(call({"build", "--r0", "17", "--out", dir / "x.fmci"}).code == 1);
        CHECK(call({"build"}).code == 1);
        CHECK(call({"frobnicate"}).code == 1);
        CHECK(call({}).code == 1);
    }
}

TEST_CASE("merge") {
    TempDir dir;
    const std::vector<std::string> shape{"--r0", "3", "--c0", "2", "--z0", "4"};
    auto build = [&](const std::string& name, const std::string& text) {
        std::vector<std::string> args{"build"};
        args.insert(args.end(), shape.begin(), shape.end());
        args.insert(args.end(), {"--out", dir / name});
        REQUIRE(call(args, text).code == 0);
    };
    build("a.fmci", lines(0, 600));
    build("b.fmci", lines(300, 1000));
    build("ab.fmci", lines(0, 600) + lines(300, 1000));
    build("fresh.fmci", "");

    REQUIRE(call({"merge", "--out", dir / "m1.fmci", dir / "a.fmci", dir / "b.fmci"}).code == 0);
    REQUIRE(call({"merge", "--out", dir / "m2.fmci", dir / "b.fmci", dir / "a.fmci"}).code == 0);
    REQUIRE(call({"merge", "--out", dir / "m3.fmci", dir / "a.fmci", dir / "fresh.fmci"}).code == 0);
    CHECK(slurp(dir / "m1.fmci") == slurp(dir / "m2.fmci"));
    CHECK(slurp(dir / "m1.fmci") == slurp(dir / "ab.fmci"));
    CHECK(slurp(dir / "m3.fmci") == slurp(dir / "a.fmci"));
    REQUIRE(call({"merge", "--out", dir / "m4.fmci", dir / "a.fmci", dir / "b.fmci",
                  dir / "a.fmci"})
                .code == 0);
    CHECK(slurp(dir / "m4.fmci") == slurp(dir / "ab.fmci"));

    REQUIRE(call({"build", "--r0", "2", "--out", dir / "other.fmci"}, "q\n").code == 0);
    CHECK(call({"merge", "--out", dir / "bad.fmci", dir / "a.fmci", dir / "other.fmci"}).code == 3);
    CHECK(call({"merge", "--out", dir / "bad.fmci", dir / "a.fmci"}).code == 1);
    CHECK(call({"merge", "--out", dir / "bad.fmci", dir / "a.fmci", dir / "nope.fmci"}).code == 2);

    write(dir / "garbage.fmci", "not a sketch");
    CHECK(call({"merge", "--out", dir / "bad.fmci", dir / "a.fmci", dir / "garbage.fmci"}).code == 2);
    CHECK(call({"query", dir / "garbage.fmci"}).code == 2);
}

TEST_CASE("query") {
    const std::string golden = (fixtures / "golden10.fmci").string();
    SUBCASE("golden JSON") {
        const auto r = call({"query", "--alpha", "0.9", "--mode", "upper", golden});
        REQUIRE(r.code == 0);
        CHECK(r.out == slurp(fixtures / "golden10_query_upper90.json"));
    }
    SUBCASE("schema and nesting") {
        for (std::string mode : {"upper", "lower", "two-sided", "two-sided-minlen"}) {
            const auto a = call({"query", "--alpha", "0.9", "--mode", mode, golden});
            const auto b = call({"query", "--alpha", "0.99", "--mode", mode, golden});
            REQUIRE(a.code == 0);
            REQUIRE(b.code == 0);
            const auto ja = nlohmann::ordered_json::parse(a.out);
            const auto jb = json::parse(b.out);
            std::vector<std::string> keys;
            for (auto it = ja.begin(); it != ja.end(); ++it) keys.push_back(it.key());
            CHECK(keys == std::vector<std::string>{"lower", "upper", "alpha", "mean_y", "h_d",
                                                   "h_u", "p0", "a0"});
            CHECK(jb["lower"].get<double>() <= ja["lower"].get<double>());
            if (mode == "lower") {
                CHECK(ja["upper"].is_null());
                CHECK(jb["upper"].is_null());
            } else {
                CHECK(jb["upper"].get<double>() >= ja["upper"].get<double>());
            }
        }
    }
    SUBCASE("fresh sketch") {
        TempDir dir;
        REQUIRE(call({"build", "--out", dir / "f.fmci"}).code == 0);
        const auto r = call({"query", "--mode", "upper", dir / "f.fmci"});
        REQUIRE(r.code == 0);
        const auto j = json::parse(r.out);
        CHECK(j["lower"].get<double>() == 0.0);
        CHECK(j["upper"].is_number());
        CHECK(j["alpha"].get<double>() == 0.95);
    }
    SUBCASE("bad arguments") {
        CHECK(call({"query", "--alpha", "1.5", golden}).code == 1);
        CHECK(call({"query", "--alpha", "0", golden}).code == 1);
        CHECK(call({"query", "--mode", "sideways", golden}).code == 1);
        CHECK(call({"query", "--mode", "two-sided", "--split", "1", golden}).code == 1);
        CHECK(call({"query", "missing.fmci"}).code == 2);
    }
}

TEST_CASE("plan") {
    auto plan = [](std::vector<std::string> extra) {
        std::vector<std::string> args{"plan", "--alpha", "0.95"};
        args.insert(args.end(), extra.begin(), extra.end());
        const auto r = call(args);
        REQUIRE(r.code == 0);
        return json::parse(r.out);
    };
    const auto equal = plan({"--r0", "2", "--c0", "2"});
    const auto minlen = plan({"--r0", "2", "--c0", "2", "--minlen"});
    const auto doubled = plan({"--r0", "3", "--c0", "2"});
    CHECK(minlen["h_d"].get<double>() + minlen["h_u"].get<double>() <=
          equal["h_d"].get<double>() + equal["h_u"].get<double>());
    for (const auto* j : {&equal, &minlen}) {
        const double a0 = (*j)["a0"].get<double>();
        const double pp = fmci::ci::tail_from_halfwidth((*j)["h_d"].get<double>(), a0,
                                                        fmci::ci::Side::plus);
        const double pm = fmci::ci::tail_from_halfwidth((*j)["h_u"].get<double>(), a0,
                                                        fmci::ci::Side::minus);
        CHECK(std::abs(pp + pm - 0.05) <= 1e-9 * 0.05);
    }
    CHECK(doubled["a0"].get<double>() == 2 * equal["a0"].get<double>());
    CHECK(doubled["h_d"].get<double>() < equal["h_d"].get<double>());
    CHECK(doubled["h_u"].get<double>() < equal["h_u"].get<double>());
    CHECK(call({"plan", "--alpha", "-0.5"}).code == 1);
    CHECK(call({"plan", "--c0", "0"}).code == 1);
}

TEST_CASE("validate") {
    TempDir dir;
    SUBCASE("pvalues replay and domination") {
        const std::vector<std::string> base{"validate", "--suite", "pvalues", "--samples", "200",
                                            "--seed", "7", "--f0", "300"};
        auto a = base;
        a.insert(a.end(), {"--csv", dir / "a.csv"});
        auto b = base;
        b.insert(b.end(), {"--csv", dir / "b.csv", "--serial"});
        REQUIRE(call(a).code == 0);
        REQUIRE(call(b).code == 0);
        const auto csv = slurp(dir / "a.csv");
        CHECK(csv == slurp(dir / "b.csv"));
        std::istringstream rows(csv);
        std::string header, row;
        std::getline(rows, header);
        CHECK(header ==
              "side,r0,c0,z0,f0,alpha,x,samples,seed,mean,stddev,ci3sigma_lo,ci3sigma_hi,"
              "analytic_value,max,dominated,boundary_hits");
        int n = 0;
        while (std::getline(rows, row)) {
            ++n;
            CHECK(row.find(",1,") != std::string::npos);  // dominated
        }
        CHECK(n == 2);
    }
    SUBCASE("coverage") {
        const auto r = call({"validate", "--suite", "coverage", "--samples", "400", "--alpha", "0.9",
                             "--r0", "2", "--c0", "2", "--csv", dir / "c.csv"});
        CHECK(r.code == 0);
        std::istringstream rows(slurp(dir / "c.csv"));
        std::string header, row;
        std::getline(rows, header);
        CHECK(header ==
              "mode,r0,c0,z0,f0,alpha,samples,seed,mean,stddev,ci3sigma_lo,ci3sigma_hi,"
              "analytic_value");
        REQUIRE(std::getline(rows, row));
        std::vector<std::string> cells;
        std::istringstream cs(row);
        for (std::string c; std::getline(cs, c, ',');) cells.push_back(c);
        REQUIRE(cells.size() == 13);
        CHECK(std::stod(cells[8]) + 3 * std::stod(cells[9]) >= 0.9);
    }
    SUBCASE("gumbel writes to stdout without --csv") {
        const auto r = call({"validate", "--suite", "gumbel", "--samples", "500"});
        CHECK(r.code == 0);
        CHECK(r.out.rfind("f0,s,samples,seed,mean,stddev,ci3sigma_lo,ci3sigma_hi,analytic_value,limit",
                          0) == 0);
        CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 16);
    }
    SUBCASE("usage errors") {
        CHECK(call({"validate", "--suite", "nope"}).code == 1);
        CHECK(call({"validate", "--suite", "pvalues", "--csv", dir / "no/dir/x.csv",
                    "--samples", "10"})
                  .code == 2);
    }
}
