#include <iostream>
#include <string>
#include <vector>

#include "nbharness/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nbharness::run_cli(args, std::cout, std::cerr);
}
