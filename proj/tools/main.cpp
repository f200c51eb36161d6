// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return esforge::cli::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
