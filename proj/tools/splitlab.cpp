#include <iostream>

#include "splitlab/cli/commands.hpp"

int main(int argc, char** argv) {
  return splitlab::cli::main_entry(argc, argv, std::cout, std::cerr);
}
