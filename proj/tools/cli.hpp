#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace swr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Process-level hooks, replaceable in tests.
struct Environment {
    std::function<const char*(const char*)> getenv;
    std::function<std::uint64_t()> entropy;

    static Environment system();
};

// Runs one command line (args excludes the program name). Results and
// reports go to `out`; diagnostics and the default JSON Lines log to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env = Environment::system());

}  // namespace swr::cli
