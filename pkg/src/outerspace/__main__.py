from outerspace.cli import main

main()
