#include <iostream>

#include "scdma/cli.hpp"

int main(int argc, char** argv) {
    return scdma::cli::run(argc, argv, std::cout, std::cerr);
}
