#include <iostream>
#include <string>
#include <vector>

#include "rla/cli.hpp"

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv, argv + argc);
    return rla::cli::run(args, std::cout, std::cerr);
}
