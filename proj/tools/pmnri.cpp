#include <pmnri/cli.hpp>

int main(int argc, char** argv) { return pmnri::run_cli(argc, argv); }
