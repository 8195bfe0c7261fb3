#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "entgrowth/io.hpp"

namespace fs = std::filesystem;
using entgrowth::read_text;
using entgrowth::write_text_atomic;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "entgrowth_cli_test";

int run(const std::string& args) {
    const std::string cmd = std::string(ENTGROWTH_CLI_PATH) + " " + args + " >" + (kRoot / "last.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string out(const std::string& name) { return "--out " + (kRoot / name).string(); }

}  // namespace

TEST_CASE("cli sweep, determinism and manifest round trip") {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    const std::string args = "sweep --protocol EE --N 16 --samples 20 --seed 7 --points 9";
    REQUIRE(run(out("a") + " " + args) == 0);
    REQUIRE(fs::exists(kRoot / "a" / "sweep.csv"));
    REQUIRE(fs::exists(kRoot / "a" / "sweep.manifest.json"));
    CHECK(run(out("b") + " --workers 3 " + args) == 0);
    CHECK(read_text(kRoot / "a" / "sweep.csv") == read_text(kRoot / "b" / "sweep.csv"));

    CHECK(run(out("c") + " --manifest " + (kRoot / "a" / "sweep.manifest.json").string()) == 0);
    CHECK(read_text(kRoot / "a" / "sweep.csv") == read_text(kRoot / "c" / "sweep.csv"));
    CHECK(read_text(kRoot / "a" / "sweep.manifest.json") == read_text(kRoot / "c" / "sweep.manifest.json"));

    CHECK(run(out("a") + " fit --measure R1") == 0);
    CHECK(fs::exists(kRoot / "a" / "fit_R1.json"));
    CHECK(run(out("a") + " report") == 0);
    CHECK(fs::exists(kRoot / "a" / "growth.svg"));
}

TEST_CASE("cli exit codes") {
    fs::create_directories(kRoot);
    CHECK(run(out("x") + " sweep --gamma 0") == 2);
    CHECK(run(out("x") + " sweep --protocol XX") == 2);
    CHECK(run(out("x") + " sweep --N 8 --samples 2 --grid 1,1") == 2);
    CHECK(run(out("missing_dir_for_report") + " report") == 4);
    CHECK(run(out("x") + " fit --input " + (kRoot / "nope.csv").string()) == 4);
    CHECK(run("") == 2);

    write_text_atomic(kRoot / "broken.json", "{\n  \"protocol\": \"EB\",\n  \"mu\": 1,\n  oops\n}\n");
    CHECK(run(out("x") + " sample --config " + (kRoot / "broken.json").string()) == 2);
    CHECK(read_text(kRoot / "last.log").find("broken.json:4") != std::string::npos);
}

TEST_CASE("cli removes partial outputs on failure") {
    fs::create_directories(kRoot / "short");
    REQUIRE(run(out("short") + " sweep --N 8 --samples 4 --grid 100,10,1,0.1") == 0);
    CHECK(run(out("short") + " fit --measure R1") == 2);
    CHECK_FALSE(fs::exists(kRoot / "short" / "fit_R1.json"));
    CHECK_FALSE(fs::exists(kRoot / "short" / "fit.manifest.json"));
    fs::remove_all(kRoot);
}
