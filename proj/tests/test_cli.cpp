#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / "despeckle_cli_tests";
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd =
        std::string("\"") + DESPECKLE_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
#ifdef _WIN32
    return status;
#else
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("help and argument validation exit codes") {
    TempDir tmp;
    CHECK(run("--help") == 0);
    CHECK(run("filter --help") == 0);
    CHECK(run("") == 2);                 // a subcommand is required
    CHECK(run("frobnicate") == 2);       // unknown subcommand
    CHECK(run("filter a b") == 2);       // --method is required
    CHECK(run("filter a b --method sdnm --bogus 1") == 2);
    CHECK(run("filter a b --method blur") == 2);
    CHECK(run("filter a b --method sdnm --eta 1.5") == 2);
    CHECK(run("filter a b --method sdnm --eta 0") == 2);
    CHECK(run("filter a b --method sdnm --iterations 0") == 2);
    CHECK(run("filter a b --method sdnm --dof 3") == 2);
    CHECK(run("simulate " + tmp.file("x.raw") + " --situation 9") == 2);
    CHECK(run("simulate " + tmp.file("x.raw") + " --situation 1 --size 8") == 2);
    CHECK(run("bench " + tmp.file("x.csv") + " --situation 1 --filters sdnm,blurry") == 2);

    // runtime failures (not parse errors) exit with 1
    CHECK(run("filter " + tmp.file("absent.raw") + " " + tmp.file("y.raw") +
              " --method sdnm") == 1);
}

TEST_CASE("simulate, filter and metrics pipeline") {
    TempDir tmp;
    const std::string noisy = tmp.file("noisy.raw");
    const std::string truth = tmp.file("truth.raw");
    const std::string ann = tmp.file("regions.json");
    REQUIRE(run("simulate " + noisy + " --situation 1 --size 64 --seed 7 --truth " + truth +
                " --annotation " + ann) == 0);
    CHECK(fs::exists(noisy));
    CHECK(fs::exists(noisy + ".hdr"));
    CHECK(fs::exists(truth));
    CHECK(fs::exists(ann));

    const std::string filtered = tmp.file("filtered.raw");
    REQUIRE(run("filter " + noisy + " " + filtered +
                " --method sdnlm --eta 0.9 --threads 2") == 0);
    CHECK(fs::exists(filtered));

    // a .pgm destination selects the 16-bit PGM container
    const std::string pgm = tmp.file("filtered.pgm");
    REQUIRE(run("filter " + noisy + " " + pgm + " --method sdnm") == 0);
    CHECK(read_text(pgm).rfind("P5\n", 0) == 0);

    const std::string csv = tmp.file("metrics.csv");
    REQUIRE(run("metrics --truth " + truth + " --test " + filtered + " --annotation " + ann +
                " " + csv) == 0);
    const std::string report = read_text(csv);
    CAPTURE(report);
    CHECK(report.rfind("ENL,Line Cont.,Edge Grad.,Edge Var.,Q Index,Beta-rho Index,BRISQUE\n",
                       0) == 0);
    CHECK(report.find(",unavailable\n") != std::string::npos);

    // header + one data row, seven comma-separated fields
    std::istringstream lines(report);
    std::string header, row, extra;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row));
    CHECK_FALSE(std::getline(lines, extra));
    CHECK(std::count(row.begin(), row.end(), ',') == 6);
}

TEST_CASE("bench reports are deterministic, including across worker counts") {
    TempDir tmp;
    const std::string args =
        " --situation 3 --size 64 --replications 2 --seed 99 --filters none,sdnm";
    const std::string a = tmp.file("a.csv");
    const std::string b = tmp.file("b.csv");
    const std::string c = tmp.file("c.csv");
    REQUIRE(run("bench " + a + args + " --workers 1") == 0);
    REQUIRE(run("bench " + b + args + " --workers 1") == 0);
    REQUIRE(run("bench " + c + args + " --workers 2") == 0);

    const std::string text = read_text(a);
    CHECK(text == read_text(b));
    CHECK(text == read_text(c));

    std::istringstream lines(text);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(lines, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);  // header + one row per filter
    CHECK(rows[1].rfind("none,", 0) == 0);
    CHECK(rows[2].rfind("sdnm,", 0) == 0);

    // a different seed must change the measurements
    const std::string d = tmp.file("d.csv");
    REQUIRE(run("bench " + d + args.substr(0, args.find("--seed")) +
                "--seed 100 --filters none,sdnm --workers 1") == 0);
    CHECK(text != read_text(d));
}
