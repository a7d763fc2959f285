#include "fiberspec/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return fiberspec::run_cli(argc, argv, std::cout, std::cerr);
}
