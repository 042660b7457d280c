#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>

#include <spdlog/spdlog.h>

// Expected warnings (rounded N_d, quasi-static checks) are noise here;
// SRL_TEST_LOG=warn brings them back.
int main(int argc, char** argv) {
    const char* level = std::getenv("SRL_TEST_LOG");
    spdlog::set_level(spdlog::level::from_str(level ? level : "error"));
    doctest::Context ctx(argc, argv);
    return ctx.run();
}
