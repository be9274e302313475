#include <iostream>

#include "graspforge/cli/cli.hpp"

int main(int argc, char** argv)
{
  return graspforge::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
