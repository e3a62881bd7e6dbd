#include "cumdiff/cli.hpp"

int main(int argc, char** argv) { return cumdiff::run_cli(argc, argv); }
