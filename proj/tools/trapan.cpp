#include "trapan/cli.hpp"

int main(int argc, char** argv) { return trapan::run_command(argc, argv); }
