from nav_token_merging.app import main

if __name__ == "__main__":
    raise SystemExit(main())
