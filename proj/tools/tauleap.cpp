#include "tauleap/cli.hpp"

int main(int argc, char** argv) { return tauleap::run_cli(argc, argv); }
