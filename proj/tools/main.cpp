#include <iostream>
#include <vector>

#include "pwmstab/app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pwmstab::run_cli(args, std::cout, std::cerr);
}
