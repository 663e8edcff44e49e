#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracop/commands.hpp"

using namespace fracop;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("fracop_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Even interior node counts keep the checkerboard mode out of the discrete
// kernel, so small-t solves stay well conditioned.
nlohmann::json base_config(const std::string& kind = "dirichlet", int n = 6) {
    nlohmann::json j;
    j["grid"] = {{"nx", n}, {"ny", n}, {"nz", n}, {"h", 1.0 / (n - 1)}, {"origin", {0, 0, 0}}};
    j["boundary"] = {{"kind", kind}};
    j["coefficients"] = {{"a1", "constant:1"}, {"a2", "constant:1"}, {"a3", "constant:1"}};
    return j;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing reports field paths") {
    nlohmann::json j = base_config();
    j["grid"].erase("nx");
    try {
        parse_config_json(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path == "config.grid.nx");
    }

    j = base_config();
    j["coefficients"]["a2"] = "sinusoidal:1,2";
    try {
        parse_config_json(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path == "config.coefficients.a2");
    }

    j = base_config();
    j["boundary"]["kind"] = "periodic";
    CHECK_THROWS_AS(parse_config_json(j), ConfigError);

    j = base_config();
    j["quadrature"] = {{"alpha", 1.7}};
    CHECK_THROWS_AS(parse_config_json(j), ConfigError);

    j = base_config();
    j["coefficients"]["a3"] = "file:/nonexistent/coeff.csv";
    CHECK_THROWS_AS(parse_config_json(j), ConfigError);
}

TEST_CASE("axis specs") {
    CHECK((parse_axis("e2") - Quaternion::e2()).norm() == 0.0);
    const Quaternion r1 = parse_axis("random:42"), r2 = parse_axis("random:42");
    CHECK((r1 - r2).norm() == 0.0);
    CHECK(std::abs(r1.vec_norm() - 1.0) < 1e-14);
    CHECK(r1.w == 0.0);
    CHECK_THROWS_AS(parse_axis("up"), ConfigError);
}

TEST_CASE("check command emits the report and honors strict mode") {
    TempDir tmp;
    std::ostringstream sink;

    nlohmann::json j = base_config("robin_type");
    j["boundary"]["a_robin"] = "constant:0";
    ProblemConfig cfg = parse_config_json(j);
    const std::string out = tmp.file("report.json");
    CHECK(cmd_check(cfg, true, out, sink) == kExitOk);
    const auto rep = nlohmann::json::parse(slurp(out));
    CHECK(rep["bounded"]["pass"] == true);
    CHECK(rep["bounded"]["kappa_Omega"] == 1.0);
    CHECK(rep["C_dOmega"]["provenance"] == "heuristic");
    CHECK(fs::exists(out + ".manifest.json"));

    // failing verdict under --strict: steep coefficients
    nlohmann::json jf = base_config("robin_type");
    jf["boundary"]["a_robin"] = "constant:0";
    jf["coefficients"]["a1"] = "sinusoidal:2,1.5,1,40,0";
    ProblemConfig cfgf = parse_config_json(jf);
    CHECK(cmd_check(cfgf, true, tmp.file("fail.json"), sink) == kExitVerdict);
    CHECK(cmd_check(cfgf, false, tmp.file("fail2.json"), sink) == kExitOk);
}

TEST_CASE("solve command: zero-coefficient mode divides by |s|^2") {
    TempDir tmp;
    nlohmann::json j = base_config();
    j["coefficients"] = {{"a1", "constant:0"}, {"a2", "constant:0"}, {"a3", "constant:0"}};
    ProblemConfig cfg = parse_config_json(j);

    QField F(cfg.grid);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1, 1);
    for (std::int64_t i = 0; i < F.data.size(); ++i) F.data[i] = d(rng);
    // boundary rows are pinned for the dirichlet closure; keep the check easy
    for (int k = 0; k < cfg.grid.nz; ++k)
        for (int jy = 0; jy < cfg.grid.ny; ++jy)
            for (int i = 0; i < cfg.grid.nx; ++i)
                if (cfg.grid.is_boundary(i, jy, k))
                    for (int c = 0; c < 4; ++c) F.data[4 * cfg.grid.index(i, jy, k) + c] = 0;
    const std::string rhs = tmp.file("rhs.csv"), out = tmp.file("u.csv");
    save_qfield(F, rhs);
    CHECK(cmd_solve(cfg, 2.0, "e1", rhs, out) == kExitOk);
    const QField u = load_qfield(out);
    CHECK((u.data - F.data / 4.0).norm() < 1e-10 * F.data.norm());
}

TEST_CASE("frac-power command round trip with report") {
    TempDir tmp;
    nlohmann::json j = base_config();
    j["quadrature"] = {{"alpha", 0.5}, {"nodes", 48}, {"trunc", 10.0}};
    ProblemConfig cfg = parse_config_json(j);
    QField v(cfg.grid);
    for (int k = 1; k < cfg.grid.nz - 1; ++k)
        for (int jy = 1; jy < cfg.grid.ny - 1; ++jy)
            for (int i = 1; i < cfg.grid.nx - 1; ++i)
                v.set(cfg.grid.index(i, jy, k), Quaternion{1.0, 0.5, 0, 0});
    const std::string in = tmp.file("v.csv"), out = tmp.file("pv.csv");
    save_qfield(v, in);
    CHECK(cmd_frac_power(cfg, in, out, "") == kExitOk);
    CHECK(fs::exists(out));
    CHECK(fs::exists(out + ".report.json"));
    const auto rep = nlohmann::json::parse(slurp(out + ".report.json"));
    CHECK(rep["alpha"] == 0.5);
    CHECK(rep["norm_total"].get<double>() > 0.0);
}

TEST_CASE("scan command writes the documented CSV schema") {
    TempDir tmp;
    ProblemConfig cfg = parse_config_json(base_config());
    const std::string csv = tmp.file("scan.csv"), js = tmp.file("scan.json");
    CHECK(cmd_scan(cfg, 0.5, 5.0, 3, "e1", csv, js) == kExitOk);
    std::ifstream is(csv);
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,normQinv,normSL,normSR,t2normQinv,tnormSL,tnormSR");
    int lines = 0;
    for (std::string line; std::getline(is, line);)
        if (!line.empty()) ++lines;
    CHECK(lines == 3);
    const auto summary = nlohmann::json::parse(slurp(js));
    CHECK(summary["sup_t2_Qinv"].get<double>() <= 1.0 + 1e-6);
    CHECK(summary["theta_ok"] == true);
}

TEST_CASE("oracle-matrix command") {
    TempDir tmp;
    std::ostringstream sink;
    const std::string out = tmp.file("oracle.json");
    CHECK(cmd_oracle_matrix(4, 7, 0.5, 400, 25.0, out, sink) == kExitOk);
    const auto rep = nlohmann::json::parse(slurp(out));
    CHECK(rep["rel_diff"].get<double>() <= 1e-5);
}

TEST_CASE("compat command strict failure") {
    TempDir tmp;
    std::ostringstream sink;
    nlohmann::json j = base_config("robin_type");
    j["coefficients"] = {{"a1", "constant:3"}, {"a2", "constant:3"}, {"a3", "constant:2"}};
    j["boundary"]["a_robin"] = "constant:3";
    j["boundary"]["b_phys"] = "constant:1";
    j["boundary"]["mu"] = 3.0;
    ProblemConfig cfg = parse_config_json(j);
    CHECK(cmd_compat(cfg, true, tmp.file("c.json"), sink) == kExitVerdict);
    j["coefficients"]["a3"] = "constant:3";
    CHECK(cmd_compat(parse_config_json(j), true, tmp.file("c2.json"), sink) == kExitOk);
}

TEST_CASE("repeated runs produce bitwise-identical outputs") {
    TempDir tmp;
    std::ostringstream sink;
    nlohmann::json j = base_config();
    j["quadrature"] = {{"alpha", 0.5}, {"nodes", 32}, {"trunc", 8.0}, {"axis", "random:9"}};
    ProblemConfig cfg = parse_config_json(j);

    QField v(cfg.grid);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-1, 1);
    for (int k = 1; k < cfg.grid.nz - 1; ++k)
        for (int jy = 1; jy < cfg.grid.ny - 1; ++jy)
            for (int i = 1; i < cfg.grid.nx - 1; ++i)
                v.set(cfg.grid.index(i, jy, k), Quaternion{d(rng), d(rng), d(rng), d(rng)});
    const std::string in = tmp.file("v.csv");
    save_qfield(v, in);

    for (const char* pass : {"a", "b"}) {
        cmd_frac_power(cfg, in, tmp.file(std::string("out_") + pass + ".csv"), "");
        cmd_check(cfg, false, tmp.file(std::string("check_") + pass + ".json"), sink);
        cmd_scan(cfg, 0.5, 2.0, 2, "e2", tmp.file(std::string("scan_") + pass + ".csv"),
                 tmp.file(std::string("scanj_") + pass + ".json"));
    }
    CHECK(slurp(tmp.file("out_a.csv")) == slurp(tmp.file("out_b.csv")));
    CHECK(slurp(tmp.file("check_a.json")) == slurp(tmp.file("check_b.json")));
    CHECK(slurp(tmp.file("scan_a.csv")) == slurp(tmp.file("scan_b.csv")));
    CHECK(slurp(tmp.file("scanj_a.json")) == slurp(tmp.file("scanj_b.json")));
}
