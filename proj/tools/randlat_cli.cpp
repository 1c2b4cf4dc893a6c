#include "randlat/cli.hpp"

int main(int argc, char** argv) { return randlat::cli::main(argc, argv); }
