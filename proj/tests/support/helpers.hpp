#ifndef UMC_TESTS_HELPERS_HPP
#define UMC_TESTS_HELPERS_HPP

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "umc/common.hpp"
#include "umc/mesh.hpp"

namespace umc_test {

// Scratch directory per test binary invocation, removed on exit.
class TempDir {
public:
    TempDir() {
        char tpl[] = "/tmp/umc-test-XXXXXX";
        const char* p = mkdtemp(tpl);
        if (!p) throw std::runtime_error("mkdtemp failed");
        path_ = p;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return path_ + "/" + name; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline umc::SplitMix64 rng_for(std::uint64_t seed) { return umc::SplitMix64{seed}; }

// Structurally valid random mesh (geometry is arbitrary; for serialization
// and mapping tests, not for interpolation quality).
inline umc::Mesh random_mesh(umc::SplitMix64& rng, int dim, std::size_t n_v, std::size_t n_cells,
                             int arity = 3) {
    umc::Mesh mesh;
    mesh.dim = dim;
    mesh.cell_arity = arity;
    mesh.vertices.reserve(n_v * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < n_v * static_cast<std::size_t>(dim); ++i)
        mesh.vertices.push_back(rng.uniform(-10.0, 10.0));
    for (std::size_t j = 0; j < n_cells * static_cast<std::size_t>(arity); ++j)
        mesh.cells.push_back(rng.next_below(n_v));
    return mesh;
}

inline std::vector<double> random_values(umc::SplitMix64& rng, std::size_t n, double lo,
                                         double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Run a command, capture stdout+stderr and the exit code.
struct CommandResult {
    int exit_code = -1;
    std::string output;
};

inline CommandResult run_command(const std::string& cmd) {
    CommandResult res;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    char buf[4096];
    while (std::size_t k = fread(buf, 1, sizeof(buf), pipe)) res.output.append(buf, k);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

}  // namespace umc_test

#endif  // UMC_TESTS_HELPERS_HPP
