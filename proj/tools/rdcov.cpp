#include "rdcov/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return rdcov::run_main(argc, argv, std::cout, std::cerr);
}
