# アプリケーションパッケージ