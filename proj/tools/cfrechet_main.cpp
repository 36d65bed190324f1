#include "cfrechet/cli.hpp"

int main(int argc, char** argv) { return cfrechet::run_cli(argc, argv); }
