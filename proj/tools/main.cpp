#include "isobenefit/Cli.hpp"

int main(int argc, char** argv) { return isobenefit::cli_main(argc, argv); }
