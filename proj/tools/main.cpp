#include "sublab/cli.hpp"

int main(int argc, char** argv) { return sublab::run_cli(argc, argv); }
