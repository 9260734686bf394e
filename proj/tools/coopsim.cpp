#include <iostream>

#include "coop/experiment.hpp"

int main(int argc, char** argv)
{
  return coop::run_cli(argc, argv, std::cout, std::cerr);
}
