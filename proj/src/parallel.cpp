#include "pmod/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pmod {

int default_threads()
{
    const char* env = std::getenv("PMOD_THREADS");
    if (!env || !*env)
        return 1;
    try {
        return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
        return 1;
    }
}

} // namespace pmod
