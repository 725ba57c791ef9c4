#include "pcbff/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return pcbff::cli::run_cli(argc, argv, std::cout, std::cerr);
}
