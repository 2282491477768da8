#ifndef ION_LOG_HPP
#define ION_LOG_HPP

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ion {

// Verbosity from the ION_LOG environment variable: 0 quiet (default), 1 info, 2 debug.
inline int log_level() {
    static int level = [] {
        const char* e = std::getenv("ION_LOG");
        if (!e) return 0;
        if (!std::strcmp(e, "info")) return 1;
        if (!std::strcmp(e, "debug")) return 2;
        return std::atoi(e);
    }();
    return level;
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
    if (log_level() >= 1) {
        std::fprintf(stderr, "[ion] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
    if (log_level() >= 2) {
        std::fprintf(stderr, "[ion:dbg] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

} // namespace ion

#endif
