#include "cli.hpp"

int main(int argc, char **argv)
{
    return pedemu::cli::main(argc, argv);
}
