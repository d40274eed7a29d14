#include "gridstrength_cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return gridstrength::cli::run(argc, argv, std::cout, std::cerr, gridstrength::cli::detect_style());
}
