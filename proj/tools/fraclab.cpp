#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) { return fraclab::cli::run_subcommand(argc, argv, std::cout, std::cerr); }
