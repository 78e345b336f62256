#include "redukt/cli.hpp"

int main(int argc, char** argv) { return redukt::run_cli(argc, argv); }
