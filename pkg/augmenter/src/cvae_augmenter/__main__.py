from cvae_augmenter.cli import main_entry

main_entry()
