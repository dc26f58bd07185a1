#include "fvtl/cli.hpp"

int main(int argc, char** argv) { return fvtl::cli::main(argc, argv); }
