"""Command-line front end of the Kotz-Wishart toolkit."""
