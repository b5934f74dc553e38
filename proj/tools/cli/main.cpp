#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

extern char** environ;

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return levyfdt::cli::run_cli(args, std::cout, std::cerr, environ);
}
