// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance                  all criteria
//   acceptance --criterion k    a single criterion (exit 0 iff it passes)
// Criterion 12 drives the CLI named by ISOKZ_CLI when set: two full
// `verify --suite desk` runs with different worker counts, compared byte for byte.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "isokz/verify.hpp"

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

isokz::verify::CheckResult cli_determinism(const std::string& cli)
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("isokz_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::string reports[2];
    int codes[2];
    const int jobs[2] = {1, 4};
    for (int i = 0; i < 2; ++i) {
        const fs::path out = dir / ("report_" + std::to_string(jobs[i]) + ".json");
        const std::string cmd = "\"" + cli + "\" verify --suite desk --jobs " + std::to_string(jobs[i]) + " --out \"" +
                                out.string() + "\" > /dev/null";
        codes[i] = std::system(cmd.c_str());
        reports[i] = slurp(out);
    }
    fs::remove_all(dir);
    isokz::verify::CheckResult r;
    r.criterion = 12;
    r.name = isokz::verify::criterion_name(12);
    // exit status 1 only means some other criterion failed; the reports must still exist
    const bool ran = !reports[0].empty() && codes[0] == codes[1];
    r.passed = ran && reports[0] == reports[1];
    r.summary = !ran ? "CLI runs did not produce comparable reports"
                     : (r.passed ? "two CLI runs (jobs 1 and 4) byte-identical, " : "CLI reports differ, ") +
                           std::to_string(reports[0].size()) + " bytes";
    return r;
}

} // namespace

int main(int argc, char** argv)
{
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--criterion k]\n";
            return 2;
        }
    }
    if (only < 0 || only > isokz::verify::kCriteria) {
        std::cerr << "criterion must be between 1 and " << isokz::verify::kCriteria << "\n";
        return 2;
    }

    const isokz::verify::SuiteOptions opt;
    bool all = true;
    for (int k = 1; k <= isokz::verify::kCriteria; ++k) {
        if (only != 0 && k != only) continue;
        const char* cli = std::getenv("ISOKZ_CLI");
        const auto r = (k == 12 && cli && *cli) ? cli_determinism(cli) : isokz::verify::run_criterion(k, opt);
        std::cout << isokz::verify::result_line(r) << std::endl;
        all = all && r.passed;
    }
    return all ? 0 : 1;
}
