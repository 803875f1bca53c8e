#include "scenred/cli.hpp"

int main(int argc, char** argv) { return scenred::run_cli(argc, argv); }
