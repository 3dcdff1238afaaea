#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end tests for the esowb binary: golden stdout bytes, exit codes,
// JSON report shapes, and content-addressed output files.

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exitCode = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    fs::path outFile = fs::temp_directory_path() / "esowb_stdout.tmp";
    fs::path errFile = fs::temp_directory_path() / "esowb_stderr.tmp";
    std::string cmd = std::string(ESOWB_BIN) + " " + args + " > " +
                      outFile.string() + " 2> " + errFile.string();
    int raw = std::system(cmd.c_str());
    RunResult r;
    r.exitCode = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(outFile);
    r.err = slurp(errFile);
    return r;
}

std::string fixture(const std::string& name) {
    return (fs::path(ESOWB_FIXTURES) / name).string();
}

std::string golden(const std::string& name) {
    return slurp(fs::path(ESOWB_GOLDEN) / name);
}

void check_golden(const std::string& args, const std::string& goldenName) {
    CAPTURE(args);
    RunResult r = run(args);
    CHECK(r.exitCode == 0);
    CHECK(r.out == golden(goldenName));
}

}  // namespace

TEST_CASE("golden outputs are byte-stable") {
    check_golden("check " + fixture("dag.eso") + " " + fixture("p3.fst"),
                 "check_dag_p3.json");
    check_golden("check " + fixture("dag.eso") + " " + fixture("c3.fst"),
                 "check_dag_c3.json");
    check_golden("her " + fixture("irref.eso") + " " + fixture("c3.fst"),
                 "her_irref_c3.json");
    check_golden("csp " + fixture("slo.eso") + " " + fixture("plt.fst"),
                 "csp_slo_plt.json");
    check_golden("witness " + fixture("dag.eso") + " " + fixture("p3.fst"),
                 "witness_dag_p3.json");
    check_golden("solve " + fixture("dag.eso") + " " + fixture("c3.fst") +
                     " --strategy selfreduce",
                 "solve_dag_c3_selfreduce.json");
    check_golden("encode kcolor --k 2", "encode_kcolor2.eso");
    check_golden("encode cts --phi " + fixture("ctsphi.eso") +
                     " --alphabet a,b",
                 "encode_cts_ab.eso");
    check_golden("reduce her2ext " + fixture("irref.eso"),
                 "reduce_her2ext_irref.json");
    check_golden("reduce ext2her " + fixture("dag.eso") + " --structure " +
                     fixture("p3.fst"),
                 "reduce_ext2her_dag_p3.json");
    check_golden("gen henson --n 5", "gen_henson5.fst");
    check_golden("instance mdual --phi " + fixture("or.cnf") + " --psi " +
                     fixture("and.cnf"),
                 "instance_mdual_or_and.fst");
}

TEST_CASE("verdict payloads parse and carry the expected fields") {
    RunResult r = run("check " + fixture("dag.eso") + " " + fixture("p3.fst"));
    json j = json::parse(r.out);
    CHECK(j["accepted"] == true);
    CHECK(j["witness"].is_string());

    r = run("witness " + fixture("dag.eso") + " " + fixture("c3.fst"));
    CHECK(r.exitCode == 0);
    j = json::parse(r.out);
    CHECK(j["accepted"] == false);
    CHECK(j["chain"].is_null());

    r = run("csp " + fixture("slo.eso") + " " + fixture("plt.fst"));
    j = json::parse(r.out);
    CHECK(j["accepted"] == true);
    CHECK(j["hom"].is_array());
    CHECK(j["template"].is_string());
}

TEST_CASE("cross-check report is clean and seeded") {
    RunResult r = run("xcheck nt --seed 7");
    CHECK(r.exitCode == 0);
    json j = json::parse(r.out);
    CHECK(j["reduction"] == "nt");
    CHECK(j["seed"] == 7);
    CHECK(j["instanceCount"].get<int>() > 0);
    CHECK(j["agreements"] == j["instanceCount"]);
    CHECK(j["disagreements"].empty());
    CHECK(j["elapsed"].get<double>() >= 0.0);
}

TEST_CASE("deliberately corrupted reduction is caught") {
    RunResult r = run("xcheck ext2her --mutate");
    CHECK(r.exitCode == 1);
    json j = json::parse(r.out);
    CHECK(j["agreements"].get<int>() < j["instanceCount"].get<int>());
    CHECK(!j["disagreements"].empty());
    CHECK(j["disagreements"].size() <= 10);
    for (auto& d : j["disagreements"]) {
        CHECK(d["input"].is_string());
        CHECK(d["expected"].is_boolean());
        CHECK(d["got"].is_boolean());
    }
}

TEST_CASE("parse and validation failures exit 2 with an error object") {
    RunResult r = run("check no_such_file.eso " + fixture("p3.fst"));
    CHECK(r.exitCode == 2);
    json j = json::parse(r.err);
    CHECK(j["error"] == "ParseError");
    CHECK(j["message"].is_string());

    r = run("reduce nope " + fixture("dag.eso"));
    CHECK(r.exitCode == 2);
    CHECK(json::parse(r.err)["error"] == "BadParams");

    r = run("reduce her2ext " + fixture("dag.eso"));
    CHECK(r.exitCode == 2);  // her2ext rejects second-order input
    CHECK(json::parse(r.err)["error"] == "BadParams");
}

TEST_CASE("exhausted budget exits 3") {
    RunResult r =
        run("solve " + fixture("dag.eso") + " " + fixture("p3.fst") +
            " --budget 1");
    CHECK(r.exitCode == 3);
    CHECK(json::parse(r.err)["error"] == "BudgetExceeded");
}

TEST_CASE("--out writes content-addressed files") {
    fs::path dir = fs::temp_directory_path() / "esowb_out_test";
    fs::remove_all(dir);

    RunResult r = run("encode dag --out " + dir.string());
    CHECK(r.exitCode == 0);
    json j = json::parse(r.out);
    std::string path = j["sentence"];
    CHECK(fs::exists(path));

    fs::path p(path);
    CHECK(p.extension() == ".eso");
    std::string stem = p.stem().string();
    CHECK(stem.size() == 12);
    CHECK(stem.find_first_not_of("0123456789abcdef") == std::string::npos);

    // same content must map to the same name
    RunResult again = run("encode dag --out " + dir.string());
    CHECK(json::parse(again.out)["sentence"] == path);

    // the file holds exactly what the inline form prints
    RunResult inlineForm = run("encode dag");
    CHECK(slurp(p) == inlineForm.out);

    fs::remove_all(dir);
}

TEST_CASE("reduce --out splits sentence and forward structure") {
    fs::path dir = fs::temp_directory_path() / "esowb_out_reduce";
    fs::remove_all(dir);

    RunResult r = run("reduce ext2her " + fixture("dag.eso") +
                      " --structure " + fixture("p3.fst") + " --out " +
                      dir.string());
    CHECK(r.exitCode == 0);
    json j = json::parse(r.out);
    CHECK(j["polarity"] == "complemented");
    CHECK(fs::exists(j["sentence"].get<std::string>()));
    CHECK(fs::exists(j["forward"].get<std::string>()));
    CHECK(fs::path(j["sentence"].get<std::string>()).extension() == ".eso");
    CHECK(fs::path(j["forward"].get<std::string>()).extension() == ".fst");

    fs::remove_all(dir);
}
