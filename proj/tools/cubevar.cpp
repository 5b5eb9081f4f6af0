#include "cubevar/cli.hpp"

int main(int argc, char** argv) { return cubevar::run_cli(argc, argv); }
