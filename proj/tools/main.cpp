#include "parisi/cli.hpp"

int main(int argc, char** argv) { return parisi::run_cli(argc, argv); }
