#include "pme/cli.hpp"

int main(int argc, char** argv) { return pme::run_cli(argc, argv); }
