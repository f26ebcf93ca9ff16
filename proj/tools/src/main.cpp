#include <iostream>
#include <string>
#include <vector>

#include "driftbench/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return driftbench::run_cli(args, std::cout, std::cerr);
}
