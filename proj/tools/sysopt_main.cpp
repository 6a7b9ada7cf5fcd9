#include <vector>

#include "sysopt/pipeline.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return sysopt::cli_dispatch(args);
}
