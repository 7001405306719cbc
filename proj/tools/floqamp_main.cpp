#include "floqamp/cli.hpp"

int main(int argc, char** argv) { return floqamp::run_cli(argc, argv); }
