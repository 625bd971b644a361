#include <iostream>
#include <string>
#include <vector>

#include "thermoid/cli.hpp"

int main(int argc, char** argv)
{
  return thermoid::run_command(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
