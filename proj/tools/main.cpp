#include <iostream>

#include "onionrank/cli.hpp"

int main(int argc, char** argv) {
    return onionrank::cli::dispatch(argc, argv, std::cin, std::cout, std::cerr);
}
