"""StarBasis command-line commands, registered by app.create_cli()."""
