#include "gkm/cli.hpp"

#include <iostream>

int
main(int argc, char** argv)
{
  return gkm::cli::run({ argv + 1, argv + argc }, std::cout, std::cerr);
}
