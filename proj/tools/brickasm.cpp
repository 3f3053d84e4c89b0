#include "brickasm/cli.hpp"

int main(int argc, char** argv) { return brickasm::run_cli(argc, argv); }
