// Acceptance suite runner: executes every criterion at its pinned thresholds
// and prints one pass/fail line per criterion. Exit code is the number of
// failing criteria. Arguments (optional): criterion numbers to run.

#include <hardwire/acceptance.hpp>

#include <cstdlib>
#include <cstring>

int main(int argc, char** argv) {
    std::vector<int> which;
    unsigned threads = 0;
    bool progress = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strncmp(argv[i], "--threads=", 10) == 0)
            threads = unsigned(std::atoi(argv[i] + 10));
        else if (std::strcmp(argv[i], "--progress") == 0)
            progress = true;
        else
            which.push_back(std::atoi(argv[i]));
    }
    auto results = hardwire::acceptance::run_criteria(which, threads, progress);
    int failures = hardwire::acceptance::print_results(results);
    std::fprintf(stdout, "acceptance: %zu criteria, %d failing\n", results.size(), failures);
    return failures;
}
