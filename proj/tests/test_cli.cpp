#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

const std::string kCli = FSOMM_CLI_PATH;
const std::string kPresets = FSOMM_PRESET_DIR;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    std::string out_path = "/tmp/fsomm_cli_test.out";
    std::string err_path = "/tmp/fsomm_cli_test.err";
    std::string cmd =
        kCli + " " + args + " >" + out_path + " 2>" + err_path;
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::string write_config(const std::string& name, const std::string& body) {
    std::string path = "/tmp/fsomm_cli_" + name + ".toml";
    std::ofstream(path) << body;
    return path;
}

const std::string kHeader =
    "scenario_id,metric,method,snr_db,value,err_estimate,n_terms,samples\n";

const std::string kAfBody =
    "[scenario]\n"
    "id = \"cli_af\"\n"
    "[fso]\n"
    "turbulence = \"strong\"\n"
    "xi = 0.893\n"
    "r = 1\n"
    "[rf]\n"
    "m = 2.0\n"
    "K = 10.0\n"
    "delta = 0.5\n"
    "[relay]\n"
    "mode = \"af\"\n"
    "c_r = 1.7\n";

} // namespace

TEST_CASE("eval emits the CSV schema and exits cleanly") {
    std::string cfg = write_config("af", kAfBody);
    auto r = run("--config " + cfg +
                 " eval --metrics outage --methods exact,oracle");
    CHECK(r.exit_code == 0);
    CHECK(r.out.substr(0, kHeader.size()) == kHeader);
    CHECK(r.out.find("cli_af,outage,exact,") != std::string::npos);
    CHECK(r.out.find("cli_af,outage,oracle,") != std::string::npos);
    CHECK(r.err.find("# fsomm eval") != std::string::npos);
}

TEST_CASE("quiet flag suppresses the run header") {
    std::string cfg = write_config("af", kAfBody);
    auto r = run("--config " + cfg +
                 " --quiet eval --metrics outage --methods exact");
    CHECK(r.exit_code == 0);
    CHECK(r.err.empty());
}

TEST_CASE("missing relay gain is a config error naming the key") {
    std::string cfg = write_config("no_gain",
                                   "[fso]\n"
                                   "turbulence = \"strong\"\n"
                                   "[rf]\n"
                                   "m = 2.0\n"
                                   "K = 10.0\n"
                                   "delta = 0.5\n"
                                   "[relay]\n"
                                   "mode = \"af\"\n");
    auto r = run("--config " + cfg + " eval");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("relay.c_r") != std::string::npos);
}

TEST_CASE("parse errors carry the line number") {
    std::string cfg = write_config("bad_line",
                                   "[fso]\n"
                                   "turbulence = \"strong\"\n"
                                   "this is not a key value pair\n");
    auto r = run("--config " + cfg + " eval");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find(":3:") != std::string::npos);
}

TEST_CASE("missing config file is a config error") {
    auto r = run("--config /tmp/fsomm_no_such_file.toml eval");
    CHECK(r.exit_code == 2);
}

TEST_CASE("explicitly empty metric list yields a header-only CSV") {
    std::string cfg = write_config("af", kAfBody);
    auto r = run("--config " + cfg + " --quiet eval --metrics \"\"");
    CHECK(r.exit_code == 0);
    CHECK(r.out == kHeader);
}

TEST_CASE("analytic output is bit-stable across runs") {
    std::string cfg = write_config("af", kAfBody);
    std::string args = "--config " + cfg +
                       " --quiet sweep --start 0 --stop 10 --step 5"
                       " --metrics outage,capacity --methods exact";
    auto r1 = run(args);
    auto r2 = run(args);
    CHECK(r1.exit_code == 0);
    CHECK(!r1.out.empty());
    CHECK(r1.out == r2.out);
}

TEST_CASE("monte carlo output is reproducible for a fixed seed") {
    std::string cfg = write_config("af", kAfBody);
    std::string args = "--config " + cfg +
                       " --quiet --seed 42 --samples 20000"
                       " eval --metrics outage --methods mc";
    auto r1 = run(args);
    auto r2 = run(args);
    CHECK(r1.exit_code == 0);
    CHECK(r1.out == r2.out);
    auto r3 = run("--config " + cfg +
                  " --quiet --seed 43 --samples 20000"
                  " eval --metrics outage --methods mc");
    CHECK(r3.out != r1.out);
}

TEST_CASE("validate flags a corrupted relay gain and skips numerics") {
    std::string body = kAfBody;
    auto pos = body.find("c_r = 1.7");
    body.replace(pos, 9, "c_r = -2.0");
    std::string cfg = write_config("neg_gain", body);
    auto r = run("--config " + cfg + " --quiet validate");
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("FAIL relay_gain_positive") != std::string::npos);
    CHECK(r.out.find("0/1 checks passed") != std::string::npos);
}

TEST_CASE("validate passes on a shipped preset") {
    auto r = run("--config " + kPresets +
                 "/df_r1_strong.toml --quiet --samples 100000 validate");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("9/9 checks passed") != std::string::npos);
}

TEST_CASE("truncation tables render the recomputed term counts") {
    auto r = run("--out /tmp/fsomm_cli_table1.csv tables 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("    61") != std::string::npos);
    CHECK(r.out.find("   183") != std::string::npos);
    CHECK(r.out.find("    19") != std::string::npos);
    std::string csv = slurp("/tmp/fsomm_cli_table1.csv");
    CHECK(csv.find("K,m,Delta,epsilon,N,achieved") != std::string::npos);
    CHECK(csv.find(",61,") != std::string::npos);
}

TEST_CASE("unsupported metric/method combination fails numerically") {
    std::string cfg = write_config("af", kAfBody);
    auto r = run("--config " + cfg +
                 " --quiet eval --metrics capacity --methods asymptotic");
    CHECK(r.exit_code == 3);
    CHECK(r.out.find("nan") != std::string::npos);
}
