#include "rtmix/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return rtmix::run_cli(argc, argv, std::cout, std::cerr); }
