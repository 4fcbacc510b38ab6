#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  return nsp::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
