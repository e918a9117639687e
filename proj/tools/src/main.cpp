#include <iostream>

#include "obj2text_tools/cli.hpp"

int main(int argc, char** argv) { return obj2text::tools::run(argc, argv, std::cout, std::cerr); }
